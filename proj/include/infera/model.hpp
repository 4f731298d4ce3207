#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace infera {

/// A candidate explanation of the evidence stream, plus the per-action
/// utility it predicts for each future step.
struct Hypothesis {
    std::string id;
    std::string label;
    std::map<std::string, std::vector<double>> outcome_streams; // action -> utilities

    bool operator==(const Hypothesis&) const = default;
};

/// Ordered hypothesis list together with the action vocabulary they score.
struct HypothesisSpace {
    std::vector<Hypothesis> hypotheses;
    std::vector<std::string> actions;

    std::size_t size() const { return hypotheses.size(); }
    std::size_t index_of(const std::string& hypothesis_id) const;
    void validate() const;

    bool operator==(const HypothesisSpace&) const = default;
};

/// One unit of evidence: a discrete symbol with the cost of making it
/// auditable and a content-compatibility logit offset.
struct Ground {
    std::string id;
    std::string symbol;
    double description_cost = 0.0;
    double compatibility = 0.0;

    bool operator==(const Ground&) const = default;
};

struct Observation {
    int step = 0;
    std::vector<Ground> grounds;

    bool operator==(const Observation&) const = default;
};

/// Belief over hypotheses at a given step.
struct LatentState {
    std::vector<double> posterior;
    int step = 0;

    void validate() const;
    bool operator==(const LatentState&) const = default;
};

/// Smoothed categorical emission model: a prior over hypotheses plus
/// per-hypothesis symbol pseudo-counts with a shared Dirichlet-style base
/// count. smoothing > 0 keeps every emission probability strictly positive.
struct WorldModel {
    std::vector<std::string> hypothesis_ids;
    std::vector<std::string> symbols;
    std::vector<double> prior;                        // aligned with hypothesis_ids
    std::vector<std::vector<double>> emission_counts; // [hypothesis][symbol]
    double smoothing = 1.0;

    std::size_t hypothesis_index(const std::string& id) const;
    std::size_t symbol_index(const std::string& symbol) const;
    void validate() const;

    bool operator==(const WorldModel&) const = default;
};

/// P(symbol | hypothesis) from smoothed counts; strictly inside (0,1)
/// whenever the alphabet has at least two symbols.
double emission_prob(const WorldModel& model, std::size_t h, std::size_t s);
double emission_prob(const WorldModel& model, const std::string& hypothesis_id,
                     const std::string& symbol);
double log_emission_prob(const WorldModel& model, std::size_t h, std::size_t s);

/// Posterior over hypotheses given one observation whose grounds are
/// weighted by `weights` (nonnegative, summing to 1). Each ground's
/// log-likelihood enters scaled by weight * |grounds|, so uniform weights
/// reproduce plain Bayes over the bundle. Computed in log space.
LatentState weighted_posterior(const WorldModel& model, const Observation& obs,
                               std::span<const double> weights);

/// Posterior-mixture probability of emitting `symbol` next.
double predictive_distribution(const WorldModel& model, const LatentState& state,
                               const std::string& symbol);

/// The full mixture over the model's alphabet, in alphabet order.
std::vector<double> predictive_mixture(const WorldModel& model,
                                       std::span<const double> posterior);

} // namespace infera
