#include "infera/identify.hpp"

#include <algorithm>
#include <cmath>

#include "infera/error.hpp"
#include "infera/numeric.hpp"

namespace infera {

const char* to_string(ProfileComponent component) {
    switch (component) {
        case ProfileComponent::R: return "R";
        case ProfileComponent::E: return "E";
        case ProfileComponent::S: return "S";
        case ProfileComponent::D: return "D";
    }
    return "?";
}

ProfileComponent profile_component_from(const std::string& letter) {
    if (letter == "R") return ProfileComponent::R;
    if (letter == "E") return ProfileComponent::E;
    if (letter == "S") return ProfileComponent::S;
    if (letter == "D") return ProfileComponent::D;
    throw ContractError("unknown profile component: " + letter +
                        " (expected one of R,E,S,D)");
}

const char* to_string(Attribution attribution) {
    switch (attribution) {
        case Attribution::None: return "none";
        case Attribution::ProfileLevel: return "profile-level";
        case Attribution::ModelLevel: return "model-level";
        case Attribution::Both: return "both";
    }
    return "?";
}

AlignmentResult align_profiles(const HypothesisSpace& space, const Agent& agent_a,
                               const Agent& agent_b, const Observation& obs,
                               const std::set<ProfileComponent>& components) {
    if (components.empty())
        throw ContractError("align_profiles: component set is empty");

    InferenceProfile aligned = agent_b.profile;
    for (ProfileComponent c : components) {
        switch (c) {
            case ProfileComponent::R:
                aligned.alpha = agent_a.profile.alpha;
                aligned.beta_r = agent_a.profile.beta_r;
                break;
            case ProfileComponent::E:
                aligned.temperature = agent_a.profile.temperature;
                break;
            case ProfileComponent::S:
                aligned.tau = agent_a.profile.tau;
                break;
            case ProfileComponent::D:
                aligned.gamma = agent_a.profile.gamma;
                break;
        }
    }

    AlignmentResult result;
    result.synchronized_components = components;
    result.outcome_a = infer(space, agent_a.model, obs, agent_a.profile);
    result.outcome_b = infer(space, agent_b.model, obs, aligned);
    result.residual = compare(result.outcome_a, result.outcome_b);
    return result;
}

namespace {

/// Sort by score descending, id ascending, and fill in the head fields.
DiscriminationResult finalize_ranking(std::vector<RankedCandidate> entries) {
    std::sort(entries.begin(), entries.end(),
              [](const RankedCandidate& a, const RankedCandidate& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.id < b.id;
              });
    DiscriminationResult result;
    result.ranking = std::move(entries);
    result.best_candidate = result.ranking.front().id;
    result.score = result.ranking.front().score;
    result.passes = result.ranking.front().passes;
    return result;
}

std::size_t argmax_index(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

/// Posterior after conditioning `state` on a single emission of symbol s.
std::vector<double> conditioned_posterior(const WorldModel& model,
                                          const LatentState& state, std::size_t s) {
    std::vector<double> log_post(state.posterior.size());
    for (std::size_t h = 0; h < log_post.size(); ++h)
        log_post[h] = std::log(state.posterior[h]) + log_emission_prob(model, h, s);
    return normalized_from_log(log_post);
}

void require_same_alphabet(const WorldModel& model_a, const WorldModel& model_b) {
    if (model_a.symbols != model_b.symbols)
        throw ContractError("models use different alphabets");
    if (model_a.hypothesis_ids.size() != model_b.hypothesis_ids.size())
        throw ContractError("models have different hypothesis counts");
}

} // namespace

DiscriminationResult design_observation(const WorldModel& model_a,
                                        const LatentState& state_a,
                                        const WorldModel& model_b,
                                        const LatentState& state_b,
                                        std::span<const std::string> candidates,
                                        double delta) {
    if (candidates.empty())
        throw ContractError("design_observation: no candidates");
    if (!(delta >= 0.0))
        throw ContractError("design_observation: delta must be >= 0");
    require_same_alphabet(model_a, model_b);

    std::vector<RankedCandidate> entries;
    entries.reserve(candidates.size());
    for (const auto& symbol : candidates) {
        const std::size_t s = model_a.symbol_index(symbol); // validates the id
        RankedCandidate entry;
        entry.id = symbol;
        entry.score = std::fabs(predictive_distribution(model_a, state_a, symbol) -
                                predictive_distribution(model_b, state_b, symbol));
        entry.passes = entry.score > delta;
        entry.map_disagree = argmax_index(conditioned_posterior(model_a, state_a, s)) !=
                             argmax_index(conditioned_posterior(model_b, state_b, s));
        entries.push_back(std::move(entry));
    }
    return finalize_ranking(std::move(entries));
}

namespace {

/// The agent's forecast of what it will observe once the forced regime has
/// run for `exposure_units` grounds: sharpen the prior belief with the
/// expected log-likelihood of data drawn from `regime`, then mix the
/// emission rows under the sharpened belief.
std::vector<double> regime_forecast(const WorldModel& model,
                                    std::span<const double> regime,
                                    double exposure_units) {
    std::vector<double> log_post(model.hypothesis_ids.size());
    for (std::size_t h = 0; h < log_post.size(); ++h) {
        double expected_ll = 0.0;
        for (std::size_t s = 0; s < regime.size(); ++s)
            expected_ll += regime[s] * log_emission_prob(model, h, s);
        log_post[h] = std::log(model.prior[h]) + exposure_units * expected_ll;
    }
    return predictive_mixture(model, normalized_from_log(log_post));
}

} // namespace

DiscriminationResult design_intervention(const Environment& env, const Agent& agent_a,
                                         const Agent& agent_b,
                                         std::span<const std::string> interventions,
                                         int horizon, double delta) {
    if (interventions.empty())
        throw ContractError("design_intervention: no interventions");
    if (horizon < 1)
        throw ContractError("design_intervention: horizon must be >= 1");
    if (!(delta >= 0.0))
        throw ContractError("design_intervention: delta must be >= 0");
    require_same_alphabet(agent_a.model, agent_b.model);
    if (agent_a.model.symbols != env.symbols)
        throw ContractError("design_intervention: environment alphabet mismatch");

    const double exposure_units =
        static_cast<double>(horizon) * static_cast<double>(env.bundle_size);

    std::vector<RankedCandidate> entries;
    entries.reserve(interventions.size());
    for (const auto& id : interventions) {
        auto it = env.interventions.find(id);
        if (it == env.interventions.end())
            throw UnknownIdError("unknown intervention id: " + id);
        const auto& regime = env.regime_distribution(it->second);

        const std::vector<double> forecast_a =
            regime_forecast(agent_a.model, regime, exposure_units);
        const std::vector<double> forecast_b =
            regime_forecast(agent_b.model, regime, exposure_units);

        RankedCandidate entry;
        entry.id = id;
        entry.score = total_variation(forecast_a, forecast_b);
        entry.passes = entry.score > delta;
        entry.map_disagree = argmax_index(forecast_a) != argmax_index(forecast_b);
        entries.push_back(std::move(entry));
    }
    return finalize_ranking(std::move(entries));
}

Attribution attribute_divergence(const HypothesisSpace& space, const Agent& agent_a,
                                 const Agent& agent_b, const Observation& obs) {
    const std::string c_aa = infer(space, agent_a.model, obs, agent_a.profile).conclusion;
    const std::string c_ab = infer(space, agent_a.model, obs, agent_b.profile).conclusion;
    const std::string c_ba = infer(space, agent_b.model, obs, agent_a.profile).conclusion;
    const std::string c_bb = infer(space, agent_b.model, obs, agent_b.profile).conclusion;

    const bool profile_effect = (c_aa != c_ab) || (c_ba != c_bb);
    const bool model_effect = (c_aa != c_ba) || (c_ab != c_bb);
    if (profile_effect && model_effect) return Attribution::Both;
    if (profile_effect) return Attribution::ProfileLevel;
    if (model_effect) return Attribution::ModelLevel;
    return Attribution::None;
}

} // namespace infera
