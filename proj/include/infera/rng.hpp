#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "infera/error.hpp"

namespace infera {

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Deterministic random stream. The engine is std::mt19937_64, whose output
/// sequence is pinned by the standard; the mappings to [0,1) and to
/// categorical indices are written out here so that replay is bit-identical
/// everywhere (std::*_distribution output is implementation-defined).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /// Independent sub-stream for (seed, label). Equal pairs share a stream.
    static RngStream derive(std::uint64_t seed, std::string_view label) {
        return RngStream(splitmix64(seed ^ fnv1a64(label)));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Index draw proportional to nonnegative weights (need not sum to 1).
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0))
                throw ContractError("categorical: negative or NaN weight");
            total += w;
        }
        if (!(total > 0.0))
            throw ContractError("categorical: weights sum to zero");
        double u = next_unit() * total;
        std::size_t last_positive = weights.size();
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            last_positive = i;
            u -= weights[i];
            if (u < 0.0) return i;
        }
        return last_positive; // u consumed by rounding; last positive wins
    }

private:
    std::mt19937_64 engine_;
};

} // namespace infera
