#include "infera/learning.hpp"

#include <algorithm>
#include <cmath>

#include "infera/error.hpp"
#include "infera/numeric.hpp"

namespace infera {

const std::vector<double>& Environment::regime_distribution(
    const std::string& regime_id) const {
    auto it = regimes.find(regime_id);
    if (it == regimes.end())
        throw UnknownIdError("unknown regime id: " + regime_id);
    return it->second;
}

void Environment::validate() const {
    if (symbols.empty()) throw ValidationError("environment.symbols: empty");
    if (regimes.empty()) throw ValidationError("environment.regimes: empty");
    if (bundle_size < 1) throw ValidationError("environment.bundle_size: must be >= 1");
    for (const auto& [id, dist] : regimes) {
        if (dist.size() != symbols.size())
            throw ValidationError("environment.regimes." + id +
                                  ": distribution does not cover the alphabet");
        double sum = 0.0;
        for (std::size_t s = 0; s < dist.size(); ++s) {
            if (!(dist[s] > 0.0))
                throw ValidationError("environment.regimes." + id + "." + symbols[s] +
                                      ": catalog symbols need positive probability");
            sum += dist[s];
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw ValidationError("environment.regimes." + id +
                                  ": probabilities sum to " + std::to_string(sum) +
                                  ", expected 1 (within 1e-9)");
    }
    if (!regimes.count(active_regime))
        throw ValidationError("environment.active_regime: unknown regime " + active_regime);
    if (ground_catalog.size() != symbols.size())
        throw ValidationError("environment.ground_catalog: must declare exactly one "
                              "entry per symbol");
    for (const auto& sym : symbols) {
        auto it = ground_catalog.find(sym);
        if (it == ground_catalog.end())
            throw ValidationError("environment.ground_catalog." + sym + ": missing");
        if (!(it->second.description_cost >= 0.0))
            throw ValidationError("environment.ground_catalog." + sym +
                                  ".description_cost: must be >= 0");
        if (!std::isfinite(it->second.compatibility))
            throw ValidationError("environment.ground_catalog." + sym +
                                  ".compatibility: must be finite");
    }
    for (const auto& [id, target] : interventions)
        if (!regimes.count(target))
            throw ValidationError("environment.interventions." + id +
                                  ": unknown regime " + target);
}

Observation emit_bundle(const Environment& env, int step, RngStream& rng) {
    const auto& dist = env.regime_distribution(env.active_regime);
    Observation obs;
    obs.step = step;
    obs.grounds.reserve(env.bundle_size);
    for (int i = 0; i < env.bundle_size; ++i) {
        const std::size_t s = rng.categorical(dist);
        const std::string& symbol = env.symbols[s];
        const GroundSpec& spec = env.ground_catalog.at(symbol);
        obs.grounds.push_back(Ground{
            symbol + "@" + std::to_string(step) + "." + std::to_string(i),
            symbol, spec.description_cost, spec.compatibility});
    }
    return obs;
}

Observation full_catalog_observation(const Environment& env, int step) {
    Observation obs;
    obs.step = step;
    for (std::size_t i = 0; i < env.symbols.size(); ++i) {
        const std::string& symbol = env.symbols[i];
        const GroundSpec& spec = env.ground_catalog.at(symbol);
        obs.grounds.push_back(Ground{symbol + "@" + std::to_string(step) + "." +
                                         std::to_string(i),
                                     symbol, spec.description_cost, spec.compatibility});
    }
    return obs;
}

Observation expose(const Observation& bundle, const Agent& agent, int k,
                   RngStream& rng) {
    const int bundle_count = static_cast<int>(bundle.grounds.size());
    if (k < 1 || k > bundle_count)
        throw ContractError("expose: k must lie in [1, bundle size]");
    if (k == bundle_count) return bundle;

    const std::vector<double> weights = reference_weights(bundle.grounds, agent.profile);
    std::vector<double> remaining = weights;
    std::vector<char> selected(bundle.grounds.size(), 0);
    for (int draw = 0; draw < k; ++draw) {
        const std::size_t pick = rng.categorical(remaining);
        selected[pick] = 1;
        remaining[pick] = 0.0; // renormalization is implicit in categorical()
    }

    Observation out;
    out.step = bundle.step;
    for (std::size_t i = 0; i < bundle.grounds.size(); ++i)
        if (selected[i]) out.grounds.push_back(bundle.grounds[i]);
    return out;
}

void apply_soft_counts(WorldModel& model, const Observation& exposed,
                       std::span<const double> posterior) {
    for (const auto& ground : exposed.grounds) {
        const std::size_t s = model.symbol_index(ground.symbol);
        for (std::size_t h = 0; h < posterior.size(); ++h)
            model.emission_counts[h][s] += posterior[h];
    }
}

Agent update_model(const Agent& agent, const Observation& exposed,
                   const InferenceOutcome& outcome,
                   std::span<const double> prev_posterior) {
    const auto& tempered = outcome.posterior.posterior;
    if (prev_posterior.size() != tempered.size())
        throw ContractError("update_model: posterior size mismatch");
    if (tempered.size() != agent.model.hypothesis_ids.size())
        throw ContractError("update_model: outcome does not match agent model");

    const double delta_eta = total_variation(prev_posterior, tempered);
    const GateDecision decision = stabilization_gate(delta_eta, agent.profile.tau);

    Agent next = agent;
    if (decision == GateDecision::Update)
        apply_soft_counts(next.model, exposed, tempered);
    next.update_log.push_back(UpdateLogEntry{exposed.step, delta_eta, decision});
    return next;
}

SimulationTrace run_episode(const HypothesisSpace& space, const Environment& env,
                            std::vector<Agent> agents, int steps,
                            std::uint64_t seed) {
    if (steps < 1) throw ContractError("run_episode: steps must be >= 1");
    if (agents.empty()) throw ContractError("run_episode: no agents");

    RngStream env_rng = RngStream::derive(seed, "env");
    std::vector<RngStream> expose_rng;
    expose_rng.reserve(agents.size());
    for (const auto& agent : agents)
        expose_rng.push_back(RngStream::derive(seed, "expose/" + agent.id));

    std::vector<std::vector<double>> prev(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i)
        prev[i] = agents[i].model.prior; // belief before any inference

    SimulationTrace trace;
    trace.seed = seed;
    trace.steps.reserve(steps);
    for (int t = 0; t < steps; ++t) {
        StepRecord record;
        record.bundle = emit_bundle(env, t, env_rng);
        record.agents.reserve(agents.size());
        for (std::size_t i = 0; i < agents.size(); ++i) {
            Observation exposed =
                expose(record.bundle, agents[i], agents[i].exposure_k, expose_rng[i]);
            InferenceOutcome outcome = infer(space, agents[i].model, exposed,
                                             agents[i].profile);
            agents[i] = update_model(agents[i], exposed, outcome, prev[i]);
            prev[i] = outcome.posterior.posterior;
            const UpdateLogEntry& logged = agents[i].update_log.back();
            record.agents.push_back(AgentStepRecord{std::move(exposed), std::move(outcome),
                                                    logged.delta_eta, logged.decision});
        }
        trace.steps.push_back(std::move(record));
    }
    trace.final_agents = std::move(agents);
    return trace;
}

double model_distance(const WorldModel& model_a, const WorldModel& model_b) {
    if (model_a.hypothesis_ids.size() != model_b.hypothesis_ids.size() ||
        model_a.symbols.size() != model_b.symbols.size())
        throw ContractError("model_distance: models have different shapes");
    double acc = 0.0;
    for (std::size_t h = 0; h < model_a.hypothesis_ids.size(); ++h)
        for (std::size_t s = 0; s < model_a.symbols.size(); ++s)
            acc += std::fabs(emission_prob(model_a, h, s) - emission_prob(model_b, h, s));
    return acc;
}

RunStatistics trace_statistics(const SimulationTrace& trace, std::size_t agent_index) {
    if (agent_index >= trace.final_agents.size())
        throw ContractError("trace_statistics: agent index out of range");
    if (trace.steps.empty())
        throw ContractError("trace_statistics: empty trace");

    const Agent& agent = trace.final_agents[agent_index];
    const double hypothesis_count =
        static_cast<double>(agent.model.hypothesis_ids.size());
    const double log_h = hypothesis_count > 1.0 ? std::log(hypothesis_count) : 0.0;

    double xbar = 0.0, entropy_norm = 0.0;
    int holds = 0;
    for (const auto& step : trace.steps) {
        const AgentStepRecord& rec = step.agents.at(agent_index);
        double weighted_x = 0.0;
        for (std::size_t i = 0; i < rec.exposed.grounds.size(); ++i)
            weighted_x += rec.outcome.weights[i] *
                          externalizability_score(rec.exposed.grounds[i].description_cost,
                                                  agent.profile.alpha);
        xbar += weighted_x;
        entropy_norm += log_h > 0.0 ? rec.outcome.entropy / log_h : 0.0;
        holds += rec.decision == GateDecision::Hold ? 1 : 0;
    }
    const double n = static_cast<double>(trace.steps.size());
    RunStatistics stats;
    stats.mean_weighted_externalizability = std::clamp(xbar / n, 0.0, 1.0);
    stats.mean_normalized_entropy = std::clamp(entropy_norm / n, 0.0, 1.0);
    stats.hold_rate = static_cast<double>(holds) / n;
    return stats;
}

} // namespace infera
