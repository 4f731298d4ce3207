#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "infera/engine.hpp"
#include "infera/rng.hpp"

namespace infera {

struct GroundSpec {
    double description_cost = 0.0;
    double compatibility = 0.0;

    bool operator==(const GroundSpec&) const = default;
};

/// The data-generating side: named symbol regimes, the one currently
/// active, and the catalog that turns drawn symbols into grounds.
/// Interventions name the regime they force.
struct Environment {
    std::vector<std::string> symbols; // alphabet order used by regime rows
    std::map<std::string, std::vector<double>> regimes;
    std::string active_regime;
    int bundle_size = 1;
    std::map<std::string, GroundSpec> ground_catalog;  // one entry per symbol
    std::map<std::string, std::string> interventions;  // id -> forced regime

    const std::vector<double>& regime_distribution(const std::string& regime_id) const;
    void validate() const;

    bool operator==(const Environment&) const = default;
};

struct UpdateLogEntry {
    int step = 0;
    double delta_eta = 0.0;
    GateDecision decision = GateDecision::Hold;

    bool operator==(const UpdateLogEntry&) const = default;
};

struct Agent {
    std::string id;
    WorldModel model;
    InferenceProfile profile;
    int exposure_k = 1;
    std::vector<UpdateLogEntry> update_log;

    bool operator==(const Agent&) const = default;
};

struct AgentStepRecord {
    Observation exposed;
    InferenceOutcome outcome;
    double delta_eta = 0.0;
    GateDecision decision = GateDecision::Hold;

    bool operator==(const AgentStepRecord&) const = default;
};

struct StepRecord {
    Observation bundle;
    std::vector<AgentStepRecord> agents;

    bool operator==(const StepRecord&) const = default;
};

/// Full episode record; replays bit-identically from (scenario, seed).
struct SimulationTrace {
    std::vector<StepRecord> steps;
    std::vector<Agent> final_agents;
    std::uint64_t seed = 0;

    bool operator==(const SimulationTrace&) const = default;
};

/// Draw bundle_size grounds i.i.d. from the active regime.
Observation emit_bundle(const Environment& env, int step, RngStream& rng);

/// One ground per catalog symbol, in alphabet order. Deterministic probe
/// observation used by demos and reports.
Observation full_catalog_observation(const Environment& env, int step);

/// Select k of the bundle's grounds without replacement, inclusion
/// probability proportional to the agent's reference weights
/// (renormalized after each draw). Original ordering is preserved.
/// k equal to the bundle size returns the bundle untouched.
Observation expose(const Observation& bundle, const Agent& agent, int k,
                   RngStream& rng);

/// Credit one observation to the count table: each ground adds one unit of
/// mass to its symbol's column, split over hypotheses by `posterior`.
void apply_soft_counts(WorldModel& model, const Observation& exposed,
                       std::span<const double> posterior);

/// Gated soft-count update. delta_eta is the total-variation distance
/// between prev_posterior and the outcome's tempered posterior; if the
/// gate fires, each exposed ground adds one unit of count mass spread
/// over hypotheses by posterior responsibility. Always appends to the
/// update log. Returns the updated agent; never mutates the input.
Agent update_model(const Agent& agent, const Observation& exposed,
                   const InferenceOutcome& outcome,
                   std::span<const double> prev_posterior);

/// Shared-bundle episode: per step one bundle is emitted and every agent
/// independently exposes, infers, and updates. Agent RNG sub-streams are
/// keyed by agent id, the environment stream by the seed alone.
SimulationTrace run_episode(const HypothesisSpace& space, const Environment& env,
                            std::vector<Agent> agents, int steps,
                            std::uint64_t seed);

/// sum_{h,s} |p_a(s|h) - p_b(s|h)| over smoothed emission probabilities.
double model_distance(const WorldModel& model_a, const WorldModel& model_b);

/// Aggregates one agent's run for project_to_bases.
RunStatistics trace_statistics(const SimulationTrace& trace, std::size_t agent_index);

} // namespace infera
