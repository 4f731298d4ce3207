#include <doctest.h>

#include <future>
#include <limits>

#include "infera/error.hpp"
#include "infera/learning.hpp"
#include "support/checks.hpp"
#include "support/random_instances.hpp"

using namespace infera;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Environment two_symbol_env(double p_metric, int bundle_size) {
    Environment env;
    env.symbols = {"metric", "anecdote"};
    env.regimes = {{"only", {p_metric, 1.0 - p_metric}}};
    env.active_regime = "only";
    env.bundle_size = bundle_size;
    env.ground_catalog = {{"metric", GroundSpec{0.1, 0.0}},
                          {"anecdote", GroundSpec{2.0, 0.0}}};
    return env;
}

HypothesisSpace two_hypothesis_space() {
    HypothesisSpace space;
    space.actions = {"go", "stay"};
    for (const char* id : {"up", "down"}) {
        Hypothesis h;
        h.id = id;
        h.label = id;
        h.outcome_streams["go"] = {id == std::string("up") ? 2.0 : -1.0, 1.0};
        h.outcome_streams["stay"] = {0.5, 0.5};
        space.hypotheses.push_back(h);
    }
    return space;
}

Agent basic_agent(const std::string& id, double tau, int k) {
    Agent agent;
    agent.id = id;
    agent.exposure_k = k;
    agent.profile = InferenceProfile{1.0, 1.0, 1.0, tau, 0.9};
    agent.model.hypothesis_ids = {"up", "down"};
    agent.model.symbols = {"metric", "anecdote"};
    agent.model.prior = {0.5, 0.5};
    agent.model.emission_counts = {{4.0, 1.0}, {1.0, 4.0}};
    agent.model.smoothing = 0.5;
    return agent;
}

} // namespace

TEST_CASE("emit_bundle: degenerate regime emits B copies") {
    Environment env;
    env.symbols = {"only"};
    env.regimes = {{"fixed", {1.0}}};
    env.active_regime = "fixed";
    env.bundle_size = 5;
    env.ground_catalog = {{"only", GroundSpec{0.3, 0.1}}};
    env.validate();

    RngStream rng(1);
    const Observation obs = emit_bundle(env, 3, rng);
    CHECK(obs.step == 3);
    REQUIRE(obs.grounds.size() == 5);
    for (const auto& g : obs.grounds) {
        CHECK(g.symbol == "only");
        CHECK(g.description_cost == 0.3);
        CHECK(g.compatibility == 0.1);
    }
}

TEST_CASE("emit_bundle: law of large numbers at fixed seed") {
    const Environment env = two_symbol_env(0.7, 10000);
    RngStream rng(20240601);
    const Observation obs = emit_bundle(env, 0, rng);
    int metric_count = 0;
    for (const auto& g : obs.grounds) metric_count += g.symbol == "metric";
    CHECK_ABS(metric_count / 10000.0, 0.7, 0.02);
}

TEST_CASE("emit_bundle: replay is bit-identical") {
    const Environment env = two_symbol_env(0.42, 16);
    RngStream rng_a = RngStream::derive(77, "env");
    RngStream rng_b = RngStream::derive(77, "env");
    for (int t = 0; t < 20; ++t)
        CHECK(emit_bundle(env, t, rng_a) == emit_bundle(env, t, rng_b));
}

TEST_CASE("expose: k equal to bundle size returns the bundle") {
    const Environment env = two_symbol_env(0.5, 6);
    RngStream env_rng(3);
    const Observation bundle = emit_bundle(env, 0, env_rng);
    const Agent agent = basic_agent("a", 0.0, 6);
    RngStream rng(4);
    CHECK(expose(bundle, agent, 6, rng) == bundle);
    CHECK_THROWS_AS(expose(bundle, agent, 0, rng), ContractError);
    CHECK_THROWS_AS(expose(bundle, agent, 7, rng), ContractError);
}

TEST_CASE("expose: sharp reference weights pin the cheap ground") {
    Observation bundle;
    bundle.step = 0;
    bundle.grounds = {Ground{"g0", "metric", 0.1, 0.0},
                      Ground{"g1", "anecdote", 2.0, 0.0},
                      Ground{"g2", "anecdote", 2.0, 0.0}};
    Agent agent = basic_agent("a", 0.0, 1);
    agent.profile.beta_r = 60.0;
    RngStream rng(88);
    int hits = 0;
    for (int i = 0; i < 10000; ++i)
        hits += expose(bundle, agent, 1, rng).grounds[0].symbol == "metric";
    CHECK(hits >= 9990);
}

TEST_CASE("expose: zero sharpness subsamples uniformly") {
    Observation bundle;
    bundle.step = 0;
    for (int i = 0; i < 4; ++i)
        bundle.grounds.push_back(
            Ground{"g" + std::to_string(i), i % 2 ? "metric" : "anecdote",
                   i % 2 ? 0.1 : 2.0, 0.0});
    Agent agent = basic_agent("a", 0.0, 1);
    agent.profile.beta_r = 0.0;
    RngStream rng(99);
    std::vector<int> hits(4, 0);
    for (int i = 0; i < 10000; ++i) {
        const Observation picked = expose(bundle, agent, 1, rng);
        for (int g = 0; g < 4; ++g)
            if (picked.grounds[0].id == bundle.grounds[g].id) ++hits[g];
    }
    for (int g = 0; g < 4; ++g) CHECK_ABS(hits[g] / 10000.0, 0.25, 0.02);
}

TEST_CASE("expose: selection preserves bundle order") {
    Observation bundle;
    bundle.step = 0;
    for (int i = 0; i < 6; ++i)
        bundle.grounds.push_back(Ground{"g" + std::to_string(i), "metric", 0.1, 0.0});
    const Agent agent = basic_agent("a", 0.0, 3);
    RngStream rng(5);
    for (int round = 0; round < 50; ++round) {
        const Observation picked = expose(bundle, agent, 3, rng);
        REQUIRE(picked.grounds.size() == 3);
        CHECK(picked.grounds[0].id < picked.grounds[1].id);
        CHECK(picked.grounds[1].id < picked.grounds[2].id);
    }
}

TEST_CASE("update_model: infinite tau freezes the model") {
    const Agent agent = basic_agent("a", kInf, 1);
    Observation exposed;
    exposed.step = 0;
    exposed.grounds = {Ground{"g0", "metric", 0.1, 0.0}};
    InferenceOutcome outcome;
    outcome.posterior = LatentState{{0.9, 0.1}, 0};
    const Agent next =
        update_model(agent, exposed, outcome, std::vector<double>{0.5, 0.5});
    CHECK(next.model == agent.model);
    REQUIRE(next.update_log.size() == 1);
    CHECK(next.update_log[0].decision == GateDecision::Hold);
    CHECK_ABS(next.update_log[0].delta_eta, 0.4, 1e-12);
}

TEST_CASE("update_model: hard assignment adds exactly one count") {
    const Agent agent = basic_agent("a", 0.0, 1);
    Observation exposed;
    exposed.step = 2;
    exposed.grounds = {Ground{"g0", "metric", 0.1, 0.0}};
    InferenceOutcome outcome;
    outcome.posterior = LatentState{{1.0, 0.0}, 2};
    const Agent next =
        update_model(agent, exposed, outcome, std::vector<double>{0.5, 0.5});
    CHECK_ABS(next.model.emission_counts[0][0],
              agent.model.emission_counts[0][0] + 1.0, 1e-15);
    CHECK(next.model.emission_counts[0][1] == agent.model.emission_counts[0][1]);
    CHECK(next.model.emission_counts[1][0] == agent.model.emission_counts[1][0]);
    CHECK(next.update_log.back().step == 2);
    CHECK(next.update_log.back().decision == GateDecision::Update);
}

TEST_CASE("update_model: soft counts match an independent recomputation") {
    RngStream rng(345);
    for (int round = 0; round < 50; ++round) {
        Agent agent = basic_agent("a", 0.0, 1);
        Observation exposed;
        exposed.step = 0;
        const int n = 1 + static_cast<int>(rng.next_u64() % 4);
        for (int i = 0; i < n; ++i)
            exposed.grounds.push_back(
                Ground{"g" + std::to_string(i),
                       rng.next_unit() < 0.5 ? "metric" : "anecdote", 0.1, 0.0});
        InferenceOutcome outcome;
        outcome.posterior = LatentState{testgen::random_distribution(rng, 2), 0};

        // expected counts, recomputed from scratch
        auto expected = agent.model.emission_counts;
        for (const auto& g : exposed.grounds) {
            const std::size_t s = g.symbol == "metric" ? 0 : 1;
            for (std::size_t h = 0; h < 2; ++h)
                expected[h][s] += outcome.posterior.posterior[h];
        }

        const Agent next =
            update_model(agent, exposed, outcome, std::vector<double>{0.5, 0.5});
        for (std::size_t h = 0; h < 2; ++h)
            for (std::size_t s = 0; s < 2; ++s)
                CHECK_ABS(next.model.emission_counts[h][s], expected[h][s], 1e-12);
    }
}

TEST_CASE("run_episode: frozen agents end where they started") {
    const auto space = two_hypothesis_space();
    const auto env = two_symbol_env(0.6, 3);
    const Agent agent = basic_agent("solo", kInf, 2);
    const SimulationTrace trace = run_episode(space, env, {agent}, 1, 9);
    REQUIRE(trace.steps.size() == 1);
    CHECK(trace.final_agents[0].model == agent.model);

    const SimulationTrace longer = run_episode(space, env, {agent}, 25, 9);
    CHECK(longer.final_agents[0].model == agent.model);
}

TEST_CASE("run_episode: identical setups share streams and traces") {
    const auto space = two_hypothesis_space();
    const auto env = two_symbol_env(0.6, 4);
    const Agent agent = basic_agent("solo", 0.05, 2);
    const SimulationTrace a = run_episode(space, env, {agent}, 40, 1234);
    const SimulationTrace b = run_episode(space, env, {agent}, 40, 1234);
    CHECK(a == b);
}

TEST_CASE("run_episode: shared bundles, per-agent exposures") {
    const auto space = two_hypothesis_space();
    const auto env = two_symbol_env(0.6, 4);
    const std::vector<Agent> agents = {basic_agent("left", 0.0, 2),
                                       basic_agent("right", 0.0, 2)};
    const SimulationTrace trace = run_episode(space, env, agents, 30, 5);
    for (const auto& step : trace.steps) {
        REQUIRE(step.agents.size() == 2);
        for (const auto& rec : step.agents) {
            CHECK(rec.exposed.grounds.size() == 2);
            // every exposed ground comes from the shared bundle
            for (const auto& g : rec.exposed.grounds) {
                bool found = false;
                for (const auto& bg : step.bundle.grounds) found |= bg == g;
                CHECK(found);
            }
        }
    }
}

TEST_CASE("run_episode: update steps conserve soft-count mass") {
    const auto space = two_hypothesis_space();
    const auto env = two_symbol_env(0.6, 4);
    const Agent agent = basic_agent("solo", 0.01, 3);
    const SimulationTrace trace = run_episode(space, env, {agent}, 50, 77);

    int updates = 0;
    for (const auto& entry : trace.final_agents[0].update_log)
        updates += entry.decision == GateDecision::Update;

    double initial_mass = 0.0, final_mass = 0.0;
    for (std::size_t h = 0; h < 2; ++h)
        for (std::size_t s = 0; s < 2; ++s) {
            initial_mass += agent.model.emission_counts[h][s];
            final_mass += trace.final_agents[0].model.emission_counts[h][s];
        }
    CHECK_ABS(final_mass - initial_mass, 3.0 * updates, 1e-9);
}

TEST_CASE("run_episode: parallel runs match serial reruns") {
    const auto space = two_hypothesis_space();
    const auto env = two_symbol_env(0.55, 4);
    const std::vector<Agent> agents = {basic_agent("a", 0.05, 2),
                                       basic_agent("b", 0.05, 2)};

    std::vector<std::future<SimulationTrace>> futures;
    for (std::uint64_t seed = 100; seed < 104; ++seed)
        futures.push_back(std::async(std::launch::async, [&, seed] {
            return run_episode(space, env, agents, 60, seed);
        }));
    for (std::uint64_t seed = 100; seed < 104; ++seed) {
        const SimulationTrace parallel = futures[seed - 100].get();
        const SimulationTrace serial = run_episode(space, env, agents, 60, seed);
        CHECK(parallel == serial);
    }
}

TEST_CASE("model_distance: zero on equal models, positive after divergence") {
    const Agent a = basic_agent("a", 0.0, 1);
    CHECK(model_distance(a.model, a.model) == 0.0);
    Agent b = a;
    b.model.emission_counts[0][0] += 5.0;
    CHECK(model_distance(a.model, b.model) > 0.0);
}

TEST_CASE("trace_statistics: frozen one-hot run hits the order corner") {
    // single hypothesis, zero-cost grounds, infinite tau: posterior one-hot,
    // every update held, weighted externalizability 1
    HypothesisSpace space;
    space.actions = {"only"};
    Hypothesis h;
    h.id = "h";
    h.label = "h";
    h.outcome_streams["only"] = {1.0};
    space.hypotheses = {h};

    Environment env;
    env.symbols = {"s"};
    env.regimes = {{"r", {1.0}}};
    env.active_regime = "r";
    env.bundle_size = 2;
    env.ground_catalog = {{"s", GroundSpec{0.0, 0.0}}};

    Agent agent;
    agent.id = "solo";
    agent.exposure_k = 1;
    agent.profile = InferenceProfile{1.0, 1.0, 1.0, kInf, 1.0};
    agent.model.hypothesis_ids = {"h"};
    agent.model.symbols = {"s"};
    agent.model.prior = {1.0};
    agent.model.emission_counts = {{0.0}};
    agent.model.smoothing = 1.0;

    const SimulationTrace trace = run_episode(space, env, {agent}, 10, 3);
    const RunStatistics stats = trace_statistics(trace, 0);
    CHECK_ABS(stats.mean_weighted_externalizability, 1.0, 1e-12);
    CHECK_ABS(stats.mean_normalized_entropy, 0.0, 1e-12);
    CHECK_ABS(stats.hold_rate, 1.0, 1e-12);
    const BasisCoordinates basis = project_to_bases(agent.profile, stats);
    CHECK_ABS(basis.externalization, 1.0, 1e-12);
    CHECK_ABS(basis.order, 1.0, 1e-12);
    CHECK_ABS(basis.abstraction, 1.0, 1e-12);
}
