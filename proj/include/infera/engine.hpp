#pragma once

#include <map>
#include <string>
#include <vector>

#include "infera/model.hpp"
#include "infera/profile.hpp"

namespace infera {

/// Everything one inference pass produces. `posterior` is the tempered
/// state; `conclusion` is the lexicographically smallest argmax action.
struct InferenceOutcome {
    LatentState posterior;
    std::string conclusion;
    std::map<std::string, double> action_values;
    double entropy = 0.0; // nats, of the tempered posterior
    std::vector<double> weights;

    bool operator==(const InferenceOutcome&) const = default;
};

struct DivergenceReport {
    bool conclusions_differ = false;
    double posterior_tv = 0.0;
    double value_gap = 0.0;

    bool operator==(const DivergenceReport&) const = default;
};

/// The full pipeline, in fixed order: reference weights, weighted
/// posterior, tempering, discounted expected action values, argmax
/// conclusion. Deterministic: equal inputs give equal outputs.
InferenceOutcome infer(const HypothesisSpace& space, const WorldModel& model,
                       const Observation& obs, const InferenceProfile& profile);

/// Pairwise divergence between two outcomes from the same scenario.
DivergenceReport compare(const InferenceOutcome& outcome_a,
                         const InferenceOutcome& outcome_b);

} // namespace infera
