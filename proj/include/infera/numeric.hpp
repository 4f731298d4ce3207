#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "infera/error.hpp"

namespace infera {

/// exp-normalize a vector of log-weights via max subtraction.
inline std::vector<double> normalized_from_log(std::span<const double> log_weights) {
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : log_weights) {
        if (std::isnan(v)) throw ContractError("normalized_from_log: NaN log-weight");
        if (v > peak) peak = v;
    }
    if (!std::isfinite(peak))
        throw ContractError("normalized_from_log: empty support");
    std::vector<double> out(log_weights.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < log_weights.size(); ++i) {
        out[i] = std::exp(log_weights[i] - peak);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw ContractError("total_variation: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::fabs(p[i] - q[i]);
    return 0.5 * acc;
}

/// Entries nonnegative and summing to 1 within tol.
inline bool is_distribution(std::span<const double> p, double tol = 1e-9) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) return false;
        sum += v;
    }
    return std::fabs(sum - 1.0) <= tol;
}

} // namespace infera
