#include <doctest.h>

#include "infera/error.hpp"
#include "infera/identify.hpp"
#include "support/checks.hpp"
#include "support/oracles.hpp"
#include "support/random_instances.hpp"

using namespace infera;

namespace {

Agent agent_from(const testgen::Instance& inst, const std::string& id,
                 const InferenceProfile& profile) {
    Agent agent;
    agent.id = id;
    agent.exposure_k = 1;
    agent.model = inst.model;
    agent.profile = profile;
    return agent;
}

/// Single-hypothesis model with an exact emission row. With smoothing s,
/// counts c_i = p_i * (1 + |S|*s) - s reproduce p_i exactly.
WorldModel point_model(const std::vector<double>& probs) {
    WorldModel model;
    model.hypothesis_ids = {"h"};
    model.prior = {1.0};
    model.smoothing = 0.01;
    const double denom = 1.0 + 0.01 * static_cast<double>(probs.size());
    for (std::size_t s = 0; s < probs.size(); ++s) {
        model.symbols.push_back("s" + std::to_string(s + 1));
        model.emission_counts.resize(1);
        model.emission_counts[0].push_back(probs[s] * denom - 0.01);
    }
    return model;
}

} // namespace

TEST_CASE("align_profiles: aligning the only differing component zeroes the residual") {
    RngStream rng(11);
    const auto inst = testgen::random_instance(rng);
    InferenceProfile profile_b = inst.profile;
    profile_b.gamma = inst.profile.gamma * 0.5;

    const Agent a = agent_from(inst, "a", inst.profile);
    const Agent b = agent_from(inst, "b", profile_b);
    const AlignmentResult result =
        align_profiles(inst.space, a, b, inst.obs, {ProfileComponent::D});
    CHECK(result.residual.posterior_tv == 0.0);
    CHECK(result.residual.value_gap == 0.0);
    CHECK_FALSE(result.residual.conclusions_differ);
    CHECK(result.outcome_a == result.outcome_b);
}

TEST_CASE("align_profiles: residual equals a direct engine recomputation") {
    RngStream rng(12);
    for (int round = 0; round < 50; ++round) {
        const auto inst = testgen::random_instance(rng);
        InferenceProfile profile_b = testgen::random_profile(rng);

        const Agent a = agent_from(inst, "a", inst.profile);
        const Agent b = agent_from(inst, "b", profile_b);
        const AlignmentResult result =
            align_profiles(inst.space, a, b, inst.obs, {ProfileComponent::D});

        InferenceProfile aligned = profile_b;
        aligned.gamma = inst.profile.gamma;
        const InferenceOutcome expected_a = infer(inst.space, a.model, inst.obs, a.profile);
        const InferenceOutcome expected_b = infer(inst.space, b.model, inst.obs, aligned);
        const DivergenceReport expected = compare(expected_a, expected_b);
        CHECK(result.residual.posterior_tv == expected.posterior_tv);
        CHECK(result.residual.value_gap == expected.value_gap);
        CHECK(result.residual.conclusions_differ == expected.conclusions_differ);

        // inputs never mutated
        CHECK(b.profile == profile_b);
    }
}

TEST_CASE("align_profiles: full alignment with shared models is exact") {
    RngStream rng(13);
    const std::set<ProfileComponent> all = {ProfileComponent::R, ProfileComponent::E,
                                            ProfileComponent::S, ProfileComponent::D};
    for (int round = 0; round < 50; ++round) {
        const auto inst = testgen::random_instance(rng);
        const Agent a = agent_from(inst, "a", inst.profile);
        const Agent b = agent_from(inst, "b", testgen::random_profile(rng));
        const AlignmentResult result = align_profiles(inst.space, a, b, inst.obs, all);
        CHECK(result.residual.posterior_tv == 0.0);
        CHECK_FALSE(result.residual.conclusions_differ);
    }
}

TEST_CASE("align_profiles: model-level divergence survives full profile alignment") {
    RngStream rng(14);
    const auto inst = testgen::random_instance(rng);
    const Agent a = agent_from(inst, "a", inst.profile);
    Agent b = agent_from(inst, "b", testgen::random_profile(rng));
    b.model.emission_counts[0][0] += 25.0; // a genuinely different model
    const AlignmentResult result = align_profiles(
        inst.space, a, b, inst.obs,
        {ProfileComponent::R, ProfileComponent::E, ProfileComponent::S,
         ProfileComponent::D});
    CHECK(result.residual.posterior_tv > 0.0);
    CHECK_THROWS_AS(align_profiles(inst.space, a, b, inst.obs, {}), ContractError);
}

TEST_CASE("design_observation: identical models score zero everywhere") {
    const WorldModel model = point_model({0.5, 0.3, 0.2});
    const LatentState state{{1.0}, 0};
    const std::vector<std::string> candidates = {"s1", "s2", "s3"};
    const DiscriminationResult result =
        design_observation(model, state, model, state, candidates, 0.05);
    CHECK_FALSE(result.passes);
    for (const auto& entry : result.ranking) {
        CHECK(entry.score == 0.0);
        CHECK_FALSE(entry.passes);
        CHECK_FALSE(entry.map_disagree);
    }
    // score ties rank lexicographically
    CHECK(result.best_candidate == "s1");
}

TEST_CASE("design_observation: closed-form gap") {
    const WorldModel model_a = point_model({0.9, 0.05, 0.05});
    const WorldModel model_b = point_model({0.4, 0.35, 0.25});
    const LatentState state{{1.0}, 0};
    const std::vector<std::string> candidates = {"s1", "s2", "s3"};
    const DiscriminationResult result =
        design_observation(model_a, state, model_b, state, candidates, 0.05);
    CHECK(result.best_candidate == "s1");
    CHECK_ABS(result.score, 0.5, 1e-9);
    CHECK(result.passes);
    CHECK_ABS(result.ranking[1].score, 0.3, 1e-9);
    CHECK_ABS(result.ranking[2].score, 0.2, 1e-9);
    CHECK(result.ranking[1].id == "s2");
    CHECK(result.ranking[2].id == "s3");
}

TEST_CASE("design_observation: exhaustive oracle equivalence") {
    RngStream rng(2077);
    for (int round = 0; round < 50; ++round) {
        auto inst_a = testgen::random_instance(rng);
        auto inst_b = testgen::random_instance(rng);
        // same alphabet and hypothesis count; reuse a's structure for b
        inst_b.model = inst_a.model;
        for (auto& row : inst_b.model.emission_counts)
            for (double& c : row) c = static_cast<double>(rng.next_u64() % 10);

        const auto state_a = testgen::random_distribution(
            rng, inst_a.model.hypothesis_ids.size());
        const auto state_b = testgen::random_distribution(
            rng, inst_a.model.hypothesis_ids.size());

        const DiscriminationResult result = design_observation(
            inst_a.model, LatentState{state_a, 0}, inst_b.model, LatentState{state_b, 0},
            inst_a.model.symbols, 0.01);

        // independent argmax with lexicographic tie-break on exact ties
        std::string best_id;
        double best_score = -1.0;
        for (const auto& symbol : inst_a.model.symbols) {
            const double gap =
                std::fabs(oracles::predictive(inst_a.model, state_a, symbol) -
                          oracles::predictive(inst_b.model, state_b, symbol));
            if (gap > best_score || (gap == best_score && symbol < best_id)) {
                best_score = gap;
                best_id = symbol;
            }
        }
        CHECK(result.best_candidate == best_id);
        CHECK_ABS(result.score, best_score, 1e-12);

        // ranking is sorted
        for (std::size_t i = 1; i < result.ranking.size(); ++i)
            CHECK(result.ranking[i - 1].score >= result.ranking[i].score);
    }
}

TEST_CASE("design_observation: delta monotonicity and symmetry") {
    const WorldModel model_a = point_model({0.9, 0.05, 0.05});
    const WorldModel model_b = point_model({0.4, 0.35, 0.25});
    const LatentState state{{1.0}, 0};
    const std::vector<std::string> candidates = {"s1", "s2", "s3"};

    bool previous = true;
    for (double delta : {0.0, 0.1, 0.3, 0.499, 0.5, 0.7}) {
        const DiscriminationResult result =
            design_observation(model_a, state, model_b, state, candidates, delta);
        CHECK((previous || !result.passes)); // non-increasing
        previous = result.passes;
        const DiscriminationResult swapped =
            design_observation(model_b, state, model_a, state, candidates, delta);
        CHECK(swapped.best_candidate == result.best_candidate);
        CHECK(swapped.score == result.score);
    }
    CHECK_THROWS_AS(design_observation(model_a, state, model_b, state, {}, 0.1),
                    ContractError);
    CHECK_THROWS_AS(
        design_observation(model_a, state, model_b, state, candidates, -0.5),
        ContractError);
}

namespace {

Environment intervention_env() {
    Environment env;
    env.symbols = {"s1", "s2"};
    env.regimes = {{"base", {0.5, 0.5}}, {"lo", {0.2, 0.8}}, {"hi", {0.85, 0.15}}};
    env.active_regime = "base";
    env.bundle_size = 3;
    env.ground_catalog = {{"s1", GroundSpec{0.2, 0.0}}, {"s2", GroundSpec{1.0, 0.0}}};
    env.interventions = {{"push-high", "hi"}, {"push-low", "lo"}, {"keep", "base"}};
    return env;
}

Agent two_hypothesis_agent(const std::string& id, double tilt) {
    Agent agent;
    agent.id = id;
    agent.exposure_k = 1;
    agent.profile = InferenceProfile{1.0, 1.0, 1.0, 0.0, 0.5};
    agent.model.hypothesis_ids = {"up", "down"};
    agent.model.symbols = {"s1", "s2"};
    agent.model.prior = {0.5, 0.5};
    agent.model.emission_counts = {{2.0 + tilt, 2.0}, {2.0, 2.0 + tilt}};
    agent.model.smoothing = 0.5;
    return agent;
}

} // namespace

TEST_CASE("design_intervention: identical models score zero") {
    const Environment env = intervention_env();
    const Agent a = two_hypothesis_agent("a", 3.0);
    Agent b = a;
    b.id = "b";
    const std::vector<std::string> ids = {"keep", "push-high", "push-low"};
    const DiscriminationResult result = design_intervention(env, a, b, ids, 5, 0.01);
    for (const auto& entry : result.ranking) {
        CHECK(entry.score == 0.0);
        CHECK_FALSE(entry.map_disagree);
    }
    CHECK_FALSE(result.passes);
}

TEST_CASE("design_intervention: brute-force equivalence and symmetry") {
    const Environment env = intervention_env();
    RngStream rng(31);
    for (int round = 0; round < 30; ++round) {
        const Agent a = two_hypothesis_agent("a", testgen::uniform(rng, 0.0, 6.0));
        const Agent b = two_hypothesis_agent("b", testgen::uniform(rng, 0.0, 6.0));
        const int horizon = 1 + static_cast<int>(rng.next_u64() % 8);
        const std::vector<std::string> ids = {"keep", "push-high", "push-low"};

        const DiscriminationResult result =
            design_intervention(env, a, b, ids, horizon, 0.01);

        // independent recomputation of every score
        std::string best_id;
        double best_score = -1.0;
        for (const auto& id : ids) {
            const auto& q = env.regime_distribution(env.interventions.at(id));
            const double units = static_cast<double>(horizon * env.bundle_size);
            std::vector<std::vector<double>> forecasts;
            for (const Agent* agent : {&a, &b}) {
                std::vector<double> logp(2);
                for (std::size_t h = 0; h < 2; ++h) {
                    double ell = 0.0;
                    for (std::size_t s = 0; s < 2; ++s)
                        ell += q[s] * std::log(emission_prob(agent->model, h, s));
                    logp[h] = std::log(0.5) + units * ell;
                }
                const double peak = std::max(logp[0], logp[1]);
                std::vector<double> z = {std::exp(logp[0] - peak),
                                         std::exp(logp[1] - peak)};
                const double norm = z[0] + z[1];
                z[0] /= norm;
                z[1] /= norm;
                forecasts.push_back(
                    {oracles::predictive(agent->model, z, "s1"),
                     oracles::predictive(agent->model, z, "s2")});
            }
            const double score = oracles::tv(forecasts[0], forecasts[1]);
            if (score > best_score + 1e-15 ||
                (std::fabs(score - best_score) <= 1e-15 && id < best_id)) {
                best_score = score;
                best_id = id;
            }
            for (const auto& entry : result.ranking)
                if (entry.id == id) CHECK_ABS(entry.score, score, 1e-12);
        }
        CHECK(result.best_candidate == best_id);
        CHECK_ABS(result.score, best_score, 1e-12);

        const DiscriminationResult swapped =
            design_intervention(env, b, a, ids, horizon, 0.01);
        CHECK(swapped.best_candidate == result.best_candidate);
        CHECK_ABS(swapped.score, result.score, 1e-15);
    }
}

TEST_CASE("design_intervention: contract errors") {
    const Environment env = intervention_env();
    const Agent a = two_hypothesis_agent("a", 1.0);
    const Agent b = two_hypothesis_agent("b", 2.0);
    const std::vector<std::string> unknown = {"not-declared"};
    CHECK_THROWS_AS(design_intervention(env, a, b, unknown, 5, 0.01), UnknownIdError);
    const std::vector<std::string> ids = {"keep"};
    CHECK_THROWS_AS(design_intervention(env, a, b, ids, 0, 0.01), ContractError);
    CHECK_THROWS_AS(design_intervention(env, a, b, {}, 5, 0.01), ContractError);
}

TEST_CASE("attribute_divergence: the four cells label the divergence") {
    RngStream rng(41);
    const auto inst = testgen::random_instance(rng);

    // identical models, profiles chosen to disagree: profile-level
    {
        Agent a = agent_from(inst, "a", InferenceProfile{1.0, 1.0, 1.0, 0.0, 0.0});
        Agent b = agent_from(inst, "b", InferenceProfile{1.0, 1.0, 1.0, 0.0, 1.0});
        const Attribution label = attribute_divergence(inst.space, a, b, inst.obs);
        const bool conclusions_differ =
            infer(inst.space, a.model, inst.obs, a.profile).conclusion !=
            infer(inst.space, b.model, inst.obs, b.profile).conclusion;
        if (conclusions_differ) CHECK(label == Attribution::ProfileLevel);
    }

    // identical profiles and models: none
    {
        const Agent a = agent_from(inst, "a", inst.profile);
        const Agent b = agent_from(inst, "b", inst.profile);
        CHECK(attribute_divergence(inst.space, a, b, inst.obs) == Attribution::None);
    }
}

TEST_CASE("attribute_divergence: model-level case and swap symmetry") {
    // two actions whose value depends only on which hypothesis dominates
    HypothesisSpace space;
    space.actions = {"go", "stay"};
    Hypothesis up{"up", "up", {{"go", {2.0}}, {"stay", {0.0}}}};
    Hypothesis down{"down", "down", {{"go", {-2.0}}, {"stay", {0.0}}}};
    space.hypotheses = {up, down};

    Agent a = two_hypothesis_agent("a", 6.0);  // believes s1 signals "up"
    Agent b = two_hypothesis_agent("b", 6.0);
    std::swap(b.model.emission_counts[0], b.model.emission_counts[1]); // reversed reading
    a.profile.gamma = 1.0;
    b.profile = a.profile;

    Observation obs;
    obs.step = 0;
    obs.grounds = {Ground{"g0", "s1", 0.2, 0.0}, Ground{"g1", "s1", 0.2, 0.0}};

    const Attribution label = attribute_divergence(space, a, b, obs);
    CHECK(label == Attribution::ModelLevel);
    CHECK(attribute_divergence(space, b, a, obs) == Attribution::ModelLevel);
}
