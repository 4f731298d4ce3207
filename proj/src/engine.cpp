#include "infera/engine.hpp"

#include <cmath>

#include "infera/error.hpp"
#include "infera/numeric.hpp"

namespace infera {

InferenceOutcome infer(const HypothesisSpace& space, const WorldModel& model,
                       const Observation& obs, const InferenceProfile& profile) {
    if (space.size() != model.hypothesis_ids.size())
        throw ContractError("infer: hypothesis space does not match model");
    profile.validate();

    // Fixed pipeline order: weights, weighted posterior, tempering,
    // discounted expected values, argmax.
    InferenceOutcome out;
    out.weights = reference_weights(obs.grounds, profile);
    LatentState raw = weighted_posterior(model, obs, out.weights);
    out.posterior = LatentState{temper(raw.posterior, profile.temperature), obs.step};
    out.entropy = hypothesis_entropy(out.posterior.posterior);

    for (const auto& action : space.actions) {
        double value = 0.0;
        for (std::size_t h = 0; h < space.size(); ++h) {
            const auto& stream = space.hypotheses[h].outcome_streams.at(action);
            value += out.posterior.posterior[h] * discounted_value(stream, profile.gamma);
        }
        out.action_values.emplace(action, value);
    }

    // std::map iterates in id order, so keeping the first strict maximum
    // yields the lexicographically smallest argmax.
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [action, value] : out.action_values) {
        if (value > best) {
            best = value;
            out.conclusion = action;
        }
    }
    return out;
}

DivergenceReport compare(const InferenceOutcome& outcome_a,
                         const InferenceOutcome& outcome_b) {
    if (outcome_a.posterior.posterior.size() != outcome_b.posterior.posterior.size())
        throw ContractError("compare: outcomes have different hypothesis spaces");
    if (outcome_a.action_values.size() != outcome_b.action_values.size())
        throw ContractError("compare: outcomes have different action sets");
    for (const auto& [action, value] : outcome_a.action_values)
        if (!outcome_b.action_values.count(action))
            throw ContractError("compare: outcomes have different action sets");

    DivergenceReport report;
    report.conclusions_differ = outcome_a.conclusion != outcome_b.conclusion;
    report.posterior_tv =
        total_variation(outcome_a.posterior.posterior, outcome_b.posterior.posterior);
    for (const auto& [action, value] : outcome_a.action_values) {
        const double gap = std::fabs(value - outcome_b.action_values.at(action));
        report.value_gap = std::max(report.value_gap, gap);
    }
    return report;
}

} // namespace infera
