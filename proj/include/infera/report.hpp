#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "infera/identify.hpp"
#include "infera/scenario.hpp"

namespace infera {

/// Per-step divergence series for one ordered agent pair. All series have
/// one entry per episode step; model_distance is taken after that step's
/// updates.
struct PairSeries {
    std::string agent_a;
    std::string agent_b;
    std::vector<bool> conclusions_differ;
    std::vector<double> posterior_tv;
    std::vector<double> value_gap;
    std::vector<double> model_distance;
    DivergenceReport final_divergence;
    double final_model_distance = 0.0;
};

struct AgentSummary {
    std::string id;
    RunStatistics stats;
    BasisCoordinates basis;
    InferenceProfile profile;
    WorldModel final_model;
};

struct RunReport {
    std::string scenario_name;
    std::string scenario_hash;
    std::uint64_t seed = 0;
    int steps = 0;
    std::vector<AgentSummary> agents;
    std::vector<PairSeries> pairs;
    // Attribution and discrimination cover the first agent pair.
    std::optional<Attribution> attribution_initial;
    std::optional<Attribution> attribution_final;
    std::optional<DiscriminationResult> observation_design;
    std::optional<DiscriminationResult> intervention_design;
};

RunReport build_report(const Scenario& scenario, const SimulationTrace& trace);

/// One JSON object per line, one line per step, numbers with up to 12
/// significant digits, LF newlines.
void write_trace_jsonl(const SimulationTrace& trace,
                       const std::filesystem::path& path);

/// Inverse of write_trace_jsonl: rebuilds the step records and replays the
/// gated updates to recover final agents. `seed` is not stored in the
/// trace file and must be supplied.
SimulationTrace read_trace_jsonl(const Scenario& scenario,
                                 const std::filesystem::path& path,
                                 std::uint64_t seed);

/// Header: step,pair,conclusions_differ,posterior_tv,value_gap,model_distance
void write_summary_csv(const RunReport& report, const std::filesystem::path& path);

nlohmann::ordered_json report_to_json(const RunReport& report);
nlohmann::ordered_json discrimination_to_json(const DiscriminationResult& result);
nlohmann::ordered_json alignment_to_json(const AlignmentResult& result);

struct SimulateOutputs {
    std::filesystem::path trace;
    std::filesystem::path summary;
    std::filesystem::path report;
};

/// End-to-end driver shared by the CLI and the acceptance suite: runs the
/// episode, builds the report, writes trace/summary/report files into
/// out_dir (file names keyed by seed when `keyed_by_seed`).
SimulateOutputs run_simulate(const Scenario& scenario, int steps, std::uint64_t seed,
                             const std::filesystem::path& out_dir,
                             bool keyed_by_seed = false);

/// Batch runner over an inclusive seed range; episodes execute in
/// parallel, one output set per seed.
std::vector<SimulateOutputs> run_simulate_batch(const Scenario& scenario, int steps,
                                                std::uint64_t seed_begin,
                                                std::uint64_t seed_end,
                                                const std::filesystem::path& out_dir);

/// Trained agents plus a deterministic probe bundle, for align and
/// discriminate. steps = 0 leaves the agents at their initial models.
struct TrainedContext {
    std::vector<Agent> agents;
    std::vector<LatentState> states; // last tempered posterior, or prior at steps=0
    Observation probe;
};

TrainedContext train_context(const Scenario& scenario, int steps, std::uint64_t seed);

} // namespace infera
