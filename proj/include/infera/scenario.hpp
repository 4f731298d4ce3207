#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "infera/learning.hpp"

namespace infera {

struct RunDefaults {
    int steps = 1;
    std::uint64_t seed = 0;
    double delta = 0.0;
    int horizon = 10;

    bool operator==(const RunDefaults&) const = default;
};

/// A fully cross-checked problem instance: the hypothesis space, the
/// environment, the agents, and run defaults.
struct Scenario {
    std::string name;
    HypothesisSpace space;
    Environment environment;
    std::vector<Agent> agents;
    RunDefaults run;

    const Agent& agent_by_id(const std::string& id) const;
    void validate() const;

    bool operator==(const Scenario&) const = default;
};

/// Parse and validate. Errors name the offending key path and, for
/// unnormalized distributions, the offending sum.
Scenario parse_scenario(const nlohmann::ordered_json& document);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical serialization; load_scenario(write_scenario(s)) == s.
nlohmann::ordered_json write_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// FNV-1a over the canonical serialization, as 16 hex digits.
std::string scenario_content_hash(const Scenario& scenario);

nlohmann::ordered_json profile_to_json(const InferenceProfile& profile);
nlohmann::ordered_json model_to_json(const WorldModel& model);

} // namespace infera
