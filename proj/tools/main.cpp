// infera CLI: simulate | align | discriminate | report
//
// Exit codes: 0 success, 2 validation failure, 3 I/O failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "infera/error.hpp"
#include "infera/report.hpp"

namespace fs = std::filesystem;
using namespace infera;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct CommonArgs {
    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--scenario", args.scenario_path, "Scenario JSON file")
        ->required();
    cmd->add_option("--seed", args.seed, "Override the scenario's run seed");
    cmd->add_option("--steps", args.steps, "Override the scenario's run steps");
    cmd->add_option("--out", args.out_dir, "Output directory");
}

std::uint64_t resolve_seed(const CommonArgs& args, const Scenario& scenario) {
    return args.seed ? *args.seed : scenario.run.seed;
}

int resolve_steps(const CommonArgs& args, const Scenario& scenario) {
    return args.steps ? *args.steps : scenario.run.steps;
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
    const auto sep = text.find("..");
    if (sep == std::string::npos)
        throw ContractError("--seeds expects the form a..b, got: " + text);
    std::uint64_t begin = 0, end = 0;
    try {
        begin = std::stoull(text.substr(0, sep));
        end = std::stoull(text.substr(sep + 2));
    } catch (const std::exception&) {
        throw ContractError("--seeds expects the form a..b, got: " + text);
    }
    if (end < begin)
        throw ContractError("--seeds range is empty: " + text);
    return {begin, end};
}

/// First two agents by default, or the --pair override "a,b".
std::pair<Agent, Agent> pick_pair(const std::vector<Agent>& agents,
                                  const std::string& pair_spec) {
    if (!pair_spec.empty()) {
        const auto comma = pair_spec.find(',');
        if (comma == std::string::npos)
            throw ContractError("--pair expects two agent ids: a,b");
        const std::string id_a = pair_spec.substr(0, comma);
        const std::string id_b = pair_spec.substr(comma + 1);
        const Agent* a = nullptr;
        const Agent* b = nullptr;
        for (const auto& agent : agents) {
            if (agent.id == id_a) a = &agent;
            if (agent.id == id_b) b = &agent;
        }
        if (!a) throw UnknownIdError("unknown agent id: " + id_a);
        if (!b) throw UnknownIdError("unknown agent id: " + id_b);
        return {*a, *b};
    }
    if (agents.size() < 2)
        throw ContractError("this command needs a scenario with at least two agents");
    return {agents[0], agents[1]};
}

void write_json_file(const fs::path& path, const nlohmann::ordered_json& j) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing file: " + path.string());
}

int cmd_simulate(const CommonArgs& args, const std::string& seeds_range) {
    const Scenario scenario = load_scenario(args.scenario_path);
    const int steps = resolve_steps(args, scenario);

    if (!seeds_range.empty()) {
        const auto [begin, end] = parse_seed_range(seeds_range);
        const auto outputs =
            run_simulate_batch(scenario, steps, begin, end, args.out_dir);
        std::cout << "simulated " << outputs.size() << " seeds (" << begin << ".."
                  << end << ") over " << steps << " steps\n";
        for (const auto& files : outputs)
            std::cout << "  " << files.trace.string() << "\n";
        return 0;
    }

    const std::uint64_t seed = resolve_seed(args, scenario);
    const SimulateOutputs files = run_simulate(scenario, steps, seed, args.out_dir);
    std::cout << "scenario " << scenario.name << " (hash "
              << scenario_content_hash(scenario) << ")\n"
              << "seed " << seed << ", steps " << steps << "\n"
              << "trace:   " << files.trace.string() << "\n"
              << "summary: " << files.summary.string() << "\n"
              << "report:  " << files.report.string() << "\n";
    return 0;
}

std::set<ProfileComponent> parse_components(const std::string& csv) {
    std::set<ProfileComponent> components;
    std::stringstream stream(csv);
    std::string token;
    while (std::getline(stream, token, ','))
        if (!token.empty()) components.insert(profile_component_from(token));
    if (components.empty())
        throw ContractError("--components expects a csv of R,E,S,D");
    return components;
}

int cmd_align(const CommonArgs& args, const std::string& components_csv, bool sweep,
              const std::string& pair_spec) {
    const Scenario scenario = load_scenario(args.scenario_path);
    const std::uint64_t seed = resolve_seed(args, scenario);
    const int steps = args.steps ? *args.steps : scenario.run.steps;

    const TrainedContext ctx = train_context(scenario, steps, seed);
    const auto [agent_a, agent_b] = pick_pair(ctx.agents, pair_spec);

    nlohmann::ordered_json out;
    out["scenario"] = scenario.name;
    out["scenario_hash"] = scenario_content_hash(scenario);
    out["seed"] = seed;
    out["steps"] = steps;
    out["pair"] = {agent_a.id, agent_b.id};

    const std::set<ProfileComponent> all = {ProfileComponent::R, ProfileComponent::E,
                                            ProfileComponent::S, ProfileComponent::D};
    if (sweep) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        // all 15 non-empty subsets, in R/E/S/D bit order
        const ProfileComponent order[4] = {ProfileComponent::R, ProfileComponent::E,
                                           ProfileComponent::S, ProfileComponent::D};
        for (unsigned mask = 1; mask < 16; ++mask) {
            std::set<ProfileComponent> subset;
            for (int bit = 0; bit < 4; ++bit)
                if (mask & (1u << bit)) subset.insert(order[bit]);
            const AlignmentResult result =
                align_profiles(scenario.space, agent_a, agent_b, ctx.probe, subset);
            rows.push_back(alignment_to_json(result));
            std::string label;
            for (ProfileComponent c : subset) {
                if (!label.empty()) label += ',';
                label += to_string(c);
            }
            std::cout << label << ": posterior_tv=" << result.residual.posterior_tv
                      << " value_gap=" << result.residual.value_gap
                      << " conclusions_differ="
                      << (result.residual.conclusions_differ ? "true" : "false")
                      << "\n";
        }
        out["sweep"] = std::move(rows);
    } else {
        const std::set<ProfileComponent> components =
            components_csv.empty() ? all : parse_components(components_csv);
        const AlignmentResult result =
            align_profiles(scenario.space, agent_a, agent_b, ctx.probe, components);
        out["alignment"] = alignment_to_json(result);
        std::cout << "residual posterior_tv=" << result.residual.posterior_tv
                  << " value_gap=" << result.residual.value_gap
                  << " conclusions_differ="
                  << (result.residual.conclusions_differ ? "true" : "false") << "\n";
    }

    const fs::path path = fs::path(args.out_dir) / "alignment.json";
    write_json_file(path, out);
    std::cout << "report:  " << path.string() << "\n";
    return 0;
}

int cmd_discriminate(const CommonArgs& args, const std::string& mode, double delta,
                     bool delta_set, std::optional<int> horizon,
                     const std::string& pair_spec) {
    const Scenario scenario = load_scenario(args.scenario_path);
    const std::uint64_t seed = resolve_seed(args, scenario);
    const int steps = args.steps ? *args.steps : scenario.run.steps;
    const double threshold = delta_set ? delta : scenario.run.delta;

    const TrainedContext ctx = train_context(scenario, steps, seed);

    std::size_t index_a = 0, index_b = 1;
    {
        const auto [agent_a, agent_b] = pick_pair(ctx.agents, pair_spec);
        for (std::size_t i = 0; i < ctx.agents.size(); ++i) {
            if (ctx.agents[i].id == agent_a.id) index_a = i;
            if (ctx.agents[i].id == agent_b.id) index_b = i;
        }
    }

    DiscriminationResult result;
    if (mode == "observation") {
        result = design_observation(ctx.agents[index_a].model, ctx.states[index_a],
                                    ctx.agents[index_b].model, ctx.states[index_b],
                                    scenario.environment.symbols, threshold);
    } else if (mode == "intervention") {
        if (scenario.environment.interventions.empty())
            throw ContractError("scenario declares no interventions");
        std::vector<std::string> ids;
        for (const auto& [id, target] : scenario.environment.interventions)
            ids.push_back(id);
        result = design_intervention(scenario.environment, ctx.agents[index_a],
                                     ctx.agents[index_b], ids,
                                     horizon ? *horizon : scenario.run.horizon,
                                     threshold);
    } else {
        throw ContractError("--mode must be observation or intervention");
    }

    nlohmann::ordered_json out;
    out["scenario"] = scenario.name;
    out["scenario_hash"] = scenario_content_hash(scenario);
    out["seed"] = seed;
    out["steps"] = steps;
    out["mode"] = mode;
    out["delta"] = threshold;
    out["pair"] = {ctx.agents[index_a].id, ctx.agents[index_b].id};
    out["result"] = discrimination_to_json(result);

    for (const auto& entry : result.ranking)
        std::cout << entry.id << ": score=" << entry.score
                  << (entry.passes ? " passes" : "") << "\n";

    const fs::path path = fs::path(args.out_dir) / "discrimination.json";
    write_json_file(path, out);
    std::cout << "report:  " << path.string() << "\n";
    return 0;
}

int cmd_report(const CommonArgs& args, const std::string& trace_path) {
    const Scenario scenario = load_scenario(args.scenario_path);
    const std::uint64_t seed = resolve_seed(args, scenario);

    const SimulationTrace trace = read_trace_jsonl(scenario, trace_path, seed);
    const RunReport report = build_report(scenario, trace);

    fs::create_directories(args.out_dir);
    const fs::path summary = fs::path(args.out_dir) / "summary.csv";
    const fs::path report_path = fs::path(args.out_dir) / "report.json";
    write_summary_csv(report, summary);
    write_json_file(report_path, report_to_json(report));
    std::cout << "recomputed " << report.steps << " steps from "
              << trace_path << "\n"
              << "summary: " << summary.string() << "\n"
              << "report:  " << report_path.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic multi-agent inference-profile simulator"};
    app.require_subcommand(1);

    CommonArgs simulate_args, align_args, discriminate_args, report_args;
    std::string seeds_range, components_csv, pair_spec_align, pair_spec_disc;
    std::string mode, trace_path;
    bool sweep = false;
    double delta = 0.0;
    std::optional<int> horizon;

    CLI::App* simulate = app.add_subcommand("simulate", "Run an episode, write trace/summary/report");
    add_common(simulate, simulate_args);
    simulate->add_option("--seeds", seeds_range, "Inclusive seed range a..b, run in parallel");

    CLI::App* align = app.add_subcommand("align", "Synchronize profile components and report residual divergence");
    add_common(align, align_args);
    align->add_option("--components", components_csv, "CSV subset of R,E,S,D (default: all)");
    align->add_flag("--sweep", sweep, "Evaluate all 15 non-empty component subsets");
    align->add_option("--pair", pair_spec_align, "Agent pair a,b (default: first two)");

    CLI::App* discriminate = app.add_subcommand("discriminate", "Rank discriminative observations or interventions");
    add_common(discriminate, discriminate_args);
    discriminate->add_option("--mode", mode, "observation | intervention")->required();
    CLI::Option* delta_opt = discriminate->add_option("--delta", delta, "Pass threshold (default: scenario run.delta)");
    discriminate->add_option("--horizon", horizon, "Forecast horizon in steps (intervention mode)");
    discriminate->add_option("--pair", pair_spec_disc, "Agent pair a,b (default: first two)");

    CLI::App* report = app.add_subcommand("report", "Recompute summary/report from an emitted trace");
    add_common(report, report_args);
    report->add_option("--trace", trace_path, "Trace .jsonl produced by simulate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(simulate_args, seeds_range);
        if (align->parsed())
            return cmd_align(align_args, components_csv, sweep, pair_spec_align);
        if (discriminate->parsed())
            return cmd_discriminate(discriminate_args, mode, delta,
                                    delta_opt->count() > 0, horizon, pair_spec_disc);
        if (report->parsed()) return cmd_report(report_args, trace_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
