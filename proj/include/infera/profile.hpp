#pragma once

#include <span>
#include <string>
#include <vector>

#include "infera/model.hpp"

namespace infera {

/// The four operational degrees of freedom of an inference pipeline:
/// reference weighting (alpha, beta_r), exploration (temperature),
/// stabilization (tau; +inf freezes the model), and horizon (gamma).
struct InferenceProfile {
    double alpha = 1.0;
    double beta_r = 1.0;
    double temperature = 1.0;
    double tau = 0.0;
    double gamma = 1.0;

    void validate() const;
    bool operator==(const InferenceProfile&) const = default;
};

enum class GateDecision { Update, Hold };

const char* to_string(GateDecision decision);

/// Where a run sits on the three recurrent axes; all coordinates in [0,1].
struct BasisCoordinates {
    double externalization = 0.0;
    double order = 0.0;
    double abstraction = 0.0;

    bool operator==(const BasisCoordinates&) const = default;
};

/// Per-run aggregates consumed by project_to_bases, each in [0,1].
struct RunStatistics {
    double mean_weighted_externalizability = 0.0; // mean over steps of sum_i w_i x_i
    double mean_normalized_entropy = 0.0;         // mean of H / log|H|
    double hold_rate = 0.0;                       // fraction of gated-out updates

    bool operator==(const RunStatistics&) const = default;
};

/// exp(-alpha * description_cost): 1 for free-to-share grounds, decaying
/// with the cost of making a ground auditable.
double externalizability_score(double description_cost, double alpha);

/// Softmax over beta_r * x_i + u_i, where x_i is the externalizability
/// score of ground i and u_i its compatibility offset. Positive, sums to 1,
/// shift-invariant in the logits.
std::vector<double> reference_weights(std::span<const Ground> grounds,
                                      const InferenceProfile& profile);

/// p_h^(1/T), renormalized. T = 1 is the identity; T -> 0 concentrates on
/// the argmax (exact ties share mass equally); larger T flattens.
std::vector<double> temper(std::span<const double> dist, double temperature);

/// Shannon entropy in nats, with 0 log 0 = 0.
double hypothesis_entropy(std::span<const double> dist);

/// Update iff delta_eta strictly exceeds tau.
GateDecision stabilization_gate(double delta_eta, double tau);

/// sum_t gamma^t stream[t], with gamma^0 = 1 (also for gamma = 0).
double discounted_value(std::span<const double> stream, double gamma);

/// Projection onto (externalization, order, abstraction):
///   externalization = mean weighted externalizability,
///   order           = (hold_rate + (1 - normalized entropy)) / 2,
///   abstraction     = gamma.
BasisCoordinates project_to_bases(const InferenceProfile& profile,
                                  const RunStatistics& stats);

} // namespace infera
