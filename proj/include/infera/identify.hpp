#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "infera/engine.hpp"
#include "infera/learning.hpp"

namespace infera {

/// The four profile components. R covers {alpha, beta_r}, E the
/// temperature, S the stabilization threshold, D the discount.
enum class ProfileComponent { R, E, S, D };

const char* to_string(ProfileComponent component);
ProfileComponent profile_component_from(const std::string& letter);

struct AlignmentResult {
    std::set<ProfileComponent> synchronized_components;
    InferenceOutcome outcome_a;
    InferenceOutcome outcome_b;
    DivergenceReport residual;
};

struct RankedCandidate {
    std::string id;
    double score = 0.0;
    bool passes = false;
    bool map_disagree = false; // argmax-level disagreement under this candidate

    bool operator==(const RankedCandidate&) const = default;
};

/// Candidates in descending score order (ties broken by id); the head is
/// the designed observation/intervention.
struct DiscriminationResult {
    std::string best_candidate;
    double score = 0.0;
    bool passes = false;
    std::vector<RankedCandidate> ranking;
};

/// Copy the named components of agent_a's profile into agent_b's, re-run
/// inference for both on `obs`, and report the residual divergence.
/// Inputs are never mutated.
AlignmentResult align_profiles(const HypothesisSpace& space, const Agent& agent_a,
                               const Agent& agent_b, const Observation& obs,
                               const std::set<ProfileComponent>& components);

/// Rank candidate symbols by the absolute gap between the two models'
/// posterior-mixture predictives; passes iff the best gap exceeds delta.
DiscriminationResult design_observation(const WorldModel& model_a,
                                        const LatentState& state_a,
                                        const WorldModel& model_b,
                                        const LatentState& state_b,
                                        std::span<const std::string> candidates,
                                        double delta);

/// Rank declared interventions by how far apart the two agents' forecasts
/// land once each internalizes `horizon` steps of expected data from the
/// forced regime. Forecasts are analytic mixtures seeded from each model's
/// prior belief; no sampling is involved. Score is the total-variation
/// distance between the two forecast symbol distributions.
DiscriminationResult design_intervention(const Environment& env, const Agent& agent_a,
                                         const Agent& agent_b,
                                         std::span<const std::string> interventions,
                                         int horizon, double delta);

/// Which side of the divergence a disagreement lives on, decided by
/// counterfactual swaps over the four (model, profile) cells.
enum class Attribution { None, ProfileLevel, ModelLevel, Both };

const char* to_string(Attribution attribution);

Attribution attribute_divergence(const HypothesisSpace& space, const Agent& agent_a,
                                 const Agent& agent_b, const Observation& obs);

} // namespace infera
