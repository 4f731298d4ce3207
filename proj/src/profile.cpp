#include "infera/profile.hpp"

#include <algorithm>
#include <cmath>

#include "infera/error.hpp"
#include "infera/numeric.hpp"

namespace infera {

void InferenceProfile::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ContractError("profile.alpha: must be finite and > 0");
    if (!std::isfinite(beta_r))
        throw ContractError("profile.beta_r: must be finite");
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw ContractError("profile.temperature: must be finite and > 0");
    if (!(tau >= 0.0)) // +inf allowed: a frozen profile
        throw ContractError("profile.tau: must be >= 0");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw ContractError("profile.gamma: must be in [0,1]");
}

const char* to_string(GateDecision decision) {
    return decision == GateDecision::Update ? "update" : "hold";
}

double externalizability_score(double description_cost, double alpha) {
    if (!(description_cost >= 0.0))
        throw ContractError("externalizability_score: description_cost must be >= 0");
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ContractError("externalizability_score: alpha must be finite and > 0");
    return std::exp(-alpha * description_cost);
}

std::vector<double> reference_weights(std::span<const Ground> grounds,
                                      const InferenceProfile& profile) {
    if (grounds.empty())
        throw ContractError("reference_weights: no grounds");
    profile.validate();
    std::vector<double> logits(grounds.size());
    for (std::size_t i = 0; i < grounds.size(); ++i) {
        const double x = externalizability_score(grounds[i].description_cost, profile.alpha);
        logits[i] = profile.beta_r * x + grounds[i].compatibility;
    }
    return normalized_from_log(logits);
}

std::vector<double> temper(std::span<const double> dist, double temperature) {
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw ContractError("temper: temperature must be finite and > 0");
    double peak = 0.0;
    for (double p : dist) {
        if (!(p >= 0.0)) throw ContractError("temper: negative entry");
        peak = std::max(peak, p);
    }
    if (!(peak > 0.0)) throw ContractError("temper: no positive entry");
    if (temperature == 1.0) return {dist.begin(), dist.end()};

    std::vector<double> scaled(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i)
        scaled[i] = std::log(dist[i]) / temperature; // log 0 = -inf stays excluded
    return normalized_from_log(scaled);
}

double hypothesis_entropy(std::span<const double> dist) {
    double h = 0.0;
    for (double p : dist) {
        if (!(p >= 0.0)) throw ContractError("hypothesis_entropy: negative entry");
        if (p > 0.0) h -= p * std::log(p);
    }
    return std::max(h, 0.0);
}

GateDecision stabilization_gate(double delta_eta, double tau) {
    if (!(delta_eta >= 0.0))
        throw ContractError("stabilization_gate: delta_eta must be >= 0");
    if (!(tau >= 0.0))
        throw ContractError("stabilization_gate: tau must be >= 0");
    return delta_eta > tau ? GateDecision::Update : GateDecision::Hold;
}

double discounted_value(std::span<const double> stream, double gamma) {
    if (stream.empty())
        throw ContractError("discounted_value: empty stream");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw ContractError("discounted_value: gamma must be in [0,1]");
    double acc = 0.0;
    double factor = 1.0; // gamma^0 == 1, also for gamma == 0
    for (double u : stream) {
        acc += factor * u;
        factor *= gamma;
    }
    return acc;
}

BasisCoordinates project_to_bases(const InferenceProfile& profile,
                                  const RunStatistics& stats) {
    profile.validate();
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(stats.mean_weighted_externalizability) ||
        !in_unit(stats.mean_normalized_entropy) || !in_unit(stats.hold_rate))
        throw ContractError("project_to_bases: statistics must lie in [0,1]");
    return BasisCoordinates{
        stats.mean_weighted_externalizability,
        0.5 * (stats.hold_rate + (1.0 - stats.mean_normalized_entropy)),
        profile.gamma,
    };
}

} // namespace infera
