#include "infera/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "infera/error.hpp"
#include "infera/numeric.hpp"

namespace infera {

using ojson = nlohmann::ordered_json;

namespace {

/// Up to 12 significant digits, the file-format contract for trace and
/// summary numbers.
std::string g12(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// Round a double through the 12-digit representation so pretty-printed
/// reports honor the same digit budget.
double snap12(double v) {
    return std::strtod(g12(v).c_str(), nullptr);
}

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

void append_double_array(std::string& out, std::span<const double> values) {
    out += '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += g12(values[i]);
    }
    out += ']';
}

} // namespace

RunReport build_report(const Scenario& scenario, const SimulationTrace& trace) {
    if (trace.steps.empty())
        throw ContractError("build_report: empty trace");
    const std::size_t agent_count = trace.final_agents.size();

    RunReport report;
    report.scenario_name = scenario.name;
    report.scenario_hash = scenario_content_hash(scenario);
    report.seed = trace.seed;
    report.steps = static_cast<int>(trace.steps.size());

    for (std::size_t i = 0; i < agent_count; ++i) {
        AgentSummary summary;
        summary.id = trace.final_agents[i].id;
        summary.stats = trace_statistics(trace, i);
        summary.profile = trace.final_agents[i].profile;
        summary.basis = project_to_bases(summary.profile, summary.stats);
        summary.final_model = trace.final_agents[i].model;
        report.agents.push_back(std::move(summary));
    }

    // Replay the gated updates so the per-step model distance reflects each
    // step's post-update tables.
    std::vector<WorldModel> models;
    models.reserve(agent_count);
    for (const auto& agent : scenario.agents) models.push_back(agent.model);

    for (std::size_t i = 0; i < agent_count; ++i)
        for (std::size_t j = i + 1; j < agent_count; ++j)
            report.pairs.push_back(PairSeries{trace.final_agents[i].id,
                                              trace.final_agents[j].id,
                                              {}, {}, {}, {}, {}, 0.0});

    for (const auto& step : trace.steps) {
        for (std::size_t i = 0; i < agent_count; ++i)
            if (step.agents[i].decision == GateDecision::Update)
                apply_soft_counts(models[i], step.agents[i].exposed,
                                  step.agents[i].outcome.posterior.posterior);
        std::size_t pair_index = 0;
        for (std::size_t i = 0; i < agent_count; ++i) {
            for (std::size_t j = i + 1; j < agent_count; ++j, ++pair_index) {
                PairSeries& series = report.pairs[pair_index];
                const DivergenceReport step_report =
                    compare(step.agents[i].outcome, step.agents[j].outcome);
                series.conclusions_differ.push_back(step_report.conclusions_differ);
                series.posterior_tv.push_back(step_report.posterior_tv);
                series.value_gap.push_back(step_report.value_gap);
                series.model_distance.push_back(model_distance(models[i], models[j]));
            }
        }
    }

    std::size_t pair_index = 0;
    for (std::size_t i = 0; i < agent_count; ++i) {
        for (std::size_t j = i + 1; j < agent_count; ++j, ++pair_index) {
            PairSeries& series = report.pairs[pair_index];
            series.final_divergence = compare(trace.steps.back().agents[i].outcome,
                                              trace.steps.back().agents[j].outcome);
            series.final_model_distance =
                model_distance(trace.final_agents[i].model, trace.final_agents[j].model);
        }
    }

    if (agent_count >= 2) {
        // Attribution runs on the neutral catalog probe (one ground per
        // symbol) before and after training, so the two labels compare the
        // same canonical report read by undiverged and diverged agents.
        report.attribution_initial =
            attribute_divergence(scenario.space, scenario.agents[0], scenario.agents[1],
                                 full_catalog_observation(scenario.environment, 0));
        report.attribution_final = attribute_divergence(
            scenario.space, trace.final_agents[0], trace.final_agents[1],
            full_catalog_observation(scenario.environment, report.steps));

        const auto& last = trace.steps.back();
        report.observation_design = design_observation(
            trace.final_agents[0].model, last.agents[0].outcome.posterior,
            trace.final_agents[1].model, last.agents[1].outcome.posterior,
            scenario.environment.symbols, scenario.run.delta);

        if (!scenario.environment.interventions.empty()) {
            std::vector<std::string> ids;
            for (const auto& [id, target] : scenario.environment.interventions)
                ids.push_back(id);
            report.intervention_design = design_intervention(
                scenario.environment, trace.final_agents[0], trace.final_agents[1], ids,
                scenario.run.horizon, scenario.run.delta);
        }
    }
    return report;
}

void write_trace_jsonl(const SimulationTrace& trace,
                       const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write trace file: " + path.string());

    for (const auto& step : trace.steps) {
        std::string line = "{\"step\":" + std::to_string(step.bundle.step);
        line += ",\"bundle\":[";
        for (std::size_t g = 0; g < step.bundle.grounds.size(); ++g) {
            const Ground& ground = step.bundle.grounds[g];
            if (g) line += ',';
            line += "{\"id\":" + quoted(ground.id);
            line += ",\"symbol\":" + quoted(ground.symbol);
            line += ",\"description_cost\":" + g12(ground.description_cost);
            line += ",\"compatibility\":" + g12(ground.compatibility) + "}";
        }
        line += "],\"agents\":[";
        for (std::size_t i = 0; i < step.agents.size(); ++i) {
            const AgentStepRecord& rec = step.agents[i];
            if (i) line += ',';
            line += "{\"id\":" + quoted(trace.final_agents[i].id);
            line += ",\"exposed\":[";
            // indices into the bundle, preserving order
            std::size_t cursor = 0;
            bool first = true;
            for (const auto& ground : rec.exposed.grounds) {
                while (cursor < step.bundle.grounds.size() &&
                       !(step.bundle.grounds[cursor] == ground))
                    ++cursor;
                if (!first) line += ',';
                line += std::to_string(cursor);
                first = false;
                ++cursor;
            }
            line += "],\"weights\":";
            append_double_array(line, rec.outcome.weights);
            line += ",\"posterior\":";
            append_double_array(line, rec.outcome.posterior.posterior);
            line += ",\"entropy\":" + g12(rec.outcome.entropy);
            line += ",\"conclusion\":" + quoted(rec.outcome.conclusion);
            line += ",\"action_values\":{";
            bool first_action = true;
            for (const auto& [action, value] : rec.outcome.action_values) {
                if (!first_action) line += ',';
                line += quoted(action) + ":" + g12(value);
                first_action = false;
            }
            line += "},\"delta_eta\":" + g12(rec.delta_eta);
            line += ",\"decision\":\"";
            line += to_string(rec.decision);
            line += "\"}";
        }
        line += "]}";
        out << line << "\n";
    }
    if (!out) throw IoError("failed writing trace file: " + path.string());
}

SimulationTrace read_trace_jsonl(const Scenario& scenario,
                                 const std::filesystem::path& path,
                                 std::uint64_t seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open trace file: " + path.string());

    SimulationTrace trace;
    trace.seed = seed;
    std::vector<Agent> agents = scenario.agents;

    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError("trace line " + std::to_string(line_number) + ": " +
                                  e.what());
        }
        StepRecord step;
        step.bundle.step = record.at("step").get<int>();
        for (const auto& gj : record.at("bundle")) {
            step.bundle.grounds.push_back(Ground{
                gj.at("id").get<std::string>(), gj.at("symbol").get<std::string>(),
                gj.at("description_cost").get<double>(),
                gj.at("compatibility").get<double>()});
        }
        const auto& agents_json = record.at("agents");
        if (agents_json.size() != agents.size())
            throw ValidationError("trace line " + std::to_string(line_number) +
                                  ": agent count differs from scenario");
        for (std::size_t i = 0; i < agents.size(); ++i) {
            const auto& aj = agents_json[i];
            AgentStepRecord rec;
            rec.exposed.step = step.bundle.step;
            for (const auto& index : aj.at("exposed")) {
                const std::size_t g = index.get<std::size_t>();
                if (g >= step.bundle.grounds.size())
                    throw ValidationError("trace line " + std::to_string(line_number) +
                                          ": exposed index out of range");
                rec.exposed.grounds.push_back(step.bundle.grounds[g]);
            }
            rec.outcome.weights = aj.at("weights").get<std::vector<double>>();
            rec.outcome.posterior =
                LatentState{aj.at("posterior").get<std::vector<double>>(),
                            step.bundle.step};
            rec.outcome.entropy = aj.at("entropy").get<double>();
            rec.outcome.conclusion = aj.at("conclusion").get<std::string>();
            for (const auto& [action, value] : aj.at("action_values").items())
                rec.outcome.action_values.emplace(action, value.get<double>());
            rec.delta_eta = aj.at("delta_eta").get<double>();
            const std::string decision = aj.at("decision").get<std::string>();
            rec.decision =
                decision == "update" ? GateDecision::Update : GateDecision::Hold;

            if (rec.decision == GateDecision::Update)
                apply_soft_counts(agents[i].model, rec.exposed,
                                  rec.outcome.posterior.posterior);
            agents[i].update_log.push_back(
                UpdateLogEntry{step.bundle.step, rec.delta_eta, rec.decision});
            step.agents.push_back(std::move(rec));
        }
        trace.steps.push_back(std::move(step));
    }
    if (trace.steps.empty())
        throw ValidationError("trace file has no step records: " + path.string());
    trace.final_agents = std::move(agents);
    return trace;
}

void write_summary_csv(const RunReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write summary file: " + path.string());
    out << "step,pair,conclusions_differ,posterior_tv,value_gap,model_distance\n";
    for (int t = 0; t < report.steps; ++t) {
        for (const auto& pair : report.pairs) {
            out << t << ',' << pair.agent_a << ':' << pair.agent_b << ','
                << (pair.conclusions_differ[t] ? "true" : "false") << ','
                << g12(pair.posterior_tv[t]) << ',' << g12(pair.value_gap[t]) << ','
                << g12(pair.model_distance[t]) << "\n";
        }
    }
    if (!out) throw IoError("failed writing summary file: " + path.string());
}

ojson discrimination_to_json(const DiscriminationResult& result) {
    ojson j;
    j["best_candidate"] = result.best_candidate;
    j["score"] = snap12(result.score);
    j["passes"] = result.passes;
    ojson ranking = ojson::array();
    for (const auto& entry : result.ranking) {
        ojson ej;
        ej["id"] = entry.id;
        ej["score"] = snap12(entry.score);
        ej["passes"] = entry.passes;
        ej["map_disagree"] = entry.map_disagree;
        ranking.push_back(std::move(ej));
    }
    j["ranking"] = std::move(ranking);
    return j;
}

ojson alignment_to_json(const AlignmentResult& result) {
    ojson j;
    ojson components = ojson::array();
    for (ProfileComponent c : result.synchronized_components)
        components.push_back(to_string(c));
    j["components"] = std::move(components);
    j["conclusion_a"] = result.outcome_a.conclusion;
    j["conclusion_b"] = result.outcome_b.conclusion;
    ojson residual;
    residual["conclusions_differ"] = result.residual.conclusions_differ;
    residual["posterior_tv"] = snap12(result.residual.posterior_tv);
    residual["value_gap"] = snap12(result.residual.value_gap);
    j["residual"] = std::move(residual);
    return j;
}

ojson report_to_json(const RunReport& report) {
    ojson j;
    j["scenario"] = report.scenario_name;
    j["scenario_hash"] = report.scenario_hash;
    j["seed"] = report.seed;
    j["steps"] = report.steps;

    ojson agents = ojson::array();
    for (const auto& summary : report.agents) {
        ojson aj;
        aj["id"] = summary.id;
        aj["profile"] = profile_to_json(summary.profile);
        ojson stats;
        stats["mean_weighted_externalizability"] =
            snap12(summary.stats.mean_weighted_externalizability);
        stats["mean_normalized_entropy"] = snap12(summary.stats.mean_normalized_entropy);
        stats["hold_rate"] = snap12(summary.stats.hold_rate);
        aj["statistics"] = std::move(stats);
        ojson basis;
        basis["externalization"] = snap12(summary.basis.externalization);
        basis["order"] = snap12(summary.basis.order);
        basis["abstraction"] = snap12(summary.basis.abstraction);
        aj["basis"] = std::move(basis);
        aj["final_model"] = model_to_json(summary.final_model);
        agents.push_back(std::move(aj));
    }
    j["agents"] = std::move(agents);

    ojson pairs = ojson::array();
    for (const auto& pair : report.pairs) {
        ojson pj;
        pj["a"] = pair.agent_a;
        pj["b"] = pair.agent_b;
        ojson final_divergence;
        final_divergence["conclusions_differ"] = pair.final_divergence.conclusions_differ;
        final_divergence["posterior_tv"] = snap12(pair.final_divergence.posterior_tv);
        final_divergence["value_gap"] = snap12(pair.final_divergence.value_gap);
        pj["final_divergence"] = std::move(final_divergence);
        pj["final_model_distance"] = snap12(pair.final_model_distance);
        pairs.push_back(std::move(pj));
    }
    j["pairs"] = std::move(pairs);

    if (report.attribution_initial || report.attribution_final) {
        ojson attribution;
        if (report.attribution_initial)
            attribution["initial"] = to_string(*report.attribution_initial);
        if (report.attribution_final)
            attribution["final"] = to_string(*report.attribution_final);
        j["attribution"] = std::move(attribution);
    }
    if (report.observation_design || report.intervention_design) {
        ojson discrimination;
        if (report.observation_design)
            discrimination["observation"] =
                discrimination_to_json(*report.observation_design);
        if (report.intervention_design)
            discrimination["intervention"] =
                discrimination_to_json(*report.intervention_design);
        j["discrimination"] = std::move(discrimination);
    }
    return j;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    out << text;
    if (!out) throw IoError("failed writing file: " + path.string());
}

} // namespace

SimulateOutputs run_simulate(const Scenario& scenario, int steps, std::uint64_t seed,
                             const std::filesystem::path& out_dir, bool keyed_by_seed) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir.string());

    SimulationTrace trace = run_episode(scenario.space, scenario.environment,
                                        scenario.agents, steps, seed);
    RunReport report = build_report(scenario, trace);

    const std::string suffix = keyed_by_seed ? "_" + std::to_string(seed) : "";
    SimulateOutputs outputs;
    outputs.trace = out_dir / ("trace" + suffix + ".jsonl");
    outputs.summary = out_dir / ("summary" + suffix + ".csv");
    outputs.report = out_dir / ("report" + suffix + ".json");

    write_trace_jsonl(trace, outputs.trace);
    write_summary_csv(report, outputs.summary);
    write_text(outputs.report, report_to_json(report).dump(2) + "\n");
    return outputs;
}

std::vector<SimulateOutputs> run_simulate_batch(const Scenario& scenario, int steps,
                                                std::uint64_t seed_begin,
                                                std::uint64_t seed_end,
                                                const std::filesystem::path& out_dir) {
    if (seed_end < seed_begin)
        throw ContractError("run_simulate_batch: empty seed range");
    const std::size_t count = static_cast<std::size_t>(seed_end - seed_begin) + 1;
    std::vector<SimulateOutputs> outputs(count);
    std::vector<std::exception_ptr> errors(count);

    unsigned workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = std::min<unsigned>(workers, static_cast<unsigned>(count));

    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < count; i += workers) {
                try {
                    outputs[i] = run_simulate(scenario, steps, seed_begin + i, out_dir,
                                              /*keyed_by_seed=*/true);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& error : errors)
        if (error) std::rethrow_exception(error);
    return outputs;
}

TrainedContext train_context(const Scenario& scenario, int steps, std::uint64_t seed) {
    TrainedContext ctx;
    ctx.agents = scenario.agents;
    ctx.states.reserve(ctx.agents.size());
    for (const auto& agent : ctx.agents)
        ctx.states.push_back(LatentState{agent.model.prior, 0});

    if (steps > 0) {
        SimulationTrace trace = run_episode(scenario.space, scenario.environment,
                                            scenario.agents, steps, seed);
        ctx.agents = trace.final_agents;
        for (std::size_t i = 0; i < ctx.agents.size(); ++i)
            ctx.states[i] = trace.steps.back().agents[i].outcome.posterior;
    }

    RngStream probe_rng = RngStream::derive(seed, "probe");
    ctx.probe = emit_bundle(scenario.environment, steps, probe_rng);
    return ctx;
}

} // namespace infera
