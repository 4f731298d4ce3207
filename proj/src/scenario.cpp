#include "infera/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "infera/error.hpp"
#include "infera/rng.hpp"

namespace infera {

using ojson = nlohmann::ordered_json;

namespace {

/// Read-side helper that tracks the key path for error messages.
struct Cursor {
    const ojson* node;
    std::string path;

    const ojson& ref() const { return *node; }

    Cursor child(const std::string& key) const {
        if (!node->is_object())
            throw ValidationError(path + ": expected an object");
        auto it = node->find(key);
        if (it == node->end())
            throw ValidationError(path + "." + key + ": missing");
        return Cursor{&*it, path + "." + key};
    }

    bool has(const std::string& key) const {
        return node->is_object() && node->contains(key);
    }

    Cursor item(std::size_t i) const {
        return Cursor{&(*node)[i], path + "[" + std::to_string(i) + "]"};
    }

    std::size_t array_size() const {
        if (!node->is_array())
            throw ValidationError(path + ": expected an array");
        return node->size();
    }

    std::string str() const {
        if (!node->is_string())
            throw ValidationError(path + ": expected a string");
        return node->get<std::string>();
    }

    double number() const {
        if (!node->is_number())
            throw ValidationError(path + ": expected a number");
        return node->get<double>();
    }

    int integer() const {
        if (!node->is_number_integer())
            throw ValidationError(path + ": expected an integer");
        return node->get<int>();
    }

    std::uint64_t uint64() const {
        if (!node->is_number_unsigned() && !node->is_number_integer())
            throw ValidationError(path + ": expected a nonnegative integer");
        const auto v = node->get<std::int64_t>();
        if (node->is_number_integer() && !node->is_number_unsigned() && v < 0)
            throw ValidationError(path + ": expected a nonnegative integer");
        return node->get<std::uint64_t>();
    }

    /// tau-style number: plain number or the string "inf"/"infinity".
    double number_or_inf() const {
        if (node->is_string()) {
            std::string s = node->get<std::string>();
            for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            if (s == "inf" || s == "infinity")
                return std::numeric_limits<double>::infinity();
            throw ValidationError(path + ": expected a number or \"inf\"");
        }
        return number();
    }
};

std::vector<std::string> parse_id_array(const Cursor& cur) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < cur.array_size(); ++i) {
        std::string id = cur.item(i).str();
        if (id.empty())
            throw ValidationError(cur.path + "[" + std::to_string(i) + "]: empty id");
        if (!seen.insert(id).second)
            throw ValidationError(cur.path + ": duplicate id " + id);
        out.push_back(std::move(id));
    }
    if (out.empty()) throw ValidationError(cur.path + ": empty");
    return out;
}

/// Distribution keyed by member of `keys`; returns a vector in key order.
/// Every key must appear; the sum must be 1 within 1e-9.
std::vector<double> parse_keyed_distribution(const Cursor& cur,
                                             const std::vector<std::string>& keys,
                                             bool require_positive) {
    if (!cur.ref().is_object())
        throw ValidationError(cur.path + ": expected an object");
    std::vector<double> out(keys.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const Cursor entry = cur.child(keys[i]);
        const double v = entry.number();
        if (require_positive ? !(v > 0.0) : !(v >= 0.0))
            throw ValidationError(entry.path + ": probability must be " +
                                  (require_positive ? "> 0" : ">= 0"));
        out[i] = v;
        sum += v;
    }
    for (const auto& [key, value] : cur.ref().items())
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ValidationError(cur.path + "." + key + ": undeclared id");
    if (std::fabs(sum - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg.precision(12);
        msg << cur.path << ": probabilities sum to " << sum
            << ", expected 1 (within 1e-9)";
        throw ValidationError(msg.str());
    }
    return out;
}

InferenceProfile parse_profile(const Cursor& cur) {
    InferenceProfile profile;
    profile.alpha = cur.child("alpha").number();
    profile.beta_r = cur.child("beta_r").number();
    profile.temperature = cur.child("temperature").number();
    profile.tau = cur.child("tau").number_or_inf();
    profile.gamma = cur.child("gamma").number();
    try {
        profile.validate();
    } catch (const ContractError& e) {
        throw ValidationError(cur.path + ": " + e.what());
    }
    return profile;
}

} // namespace

const Agent& Scenario::agent_by_id(const std::string& id) const {
    for (const auto& agent : agents)
        if (agent.id == id) return agent;
    throw UnknownIdError("unknown agent id: " + id);
}

void Scenario::validate() const {
    if (name.empty()) throw ValidationError("name: empty");
    space.validate();
    environment.validate();
    if (agents.empty()) throw ValidationError("agents: empty");
    std::set<std::string> seen;
    for (const auto& agent : agents) {
        if (!seen.insert(agent.id).second)
            throw ValidationError("agents: duplicate id " + agent.id);
        const std::string where = "agents." + agent.id;
        try {
            agent.model.validate();
            agent.profile.validate();
        } catch (const std::exception& e) {
            throw ValidationError(where + ": " + e.what());
        }
        if (agent.model.symbols != environment.symbols)
            throw ValidationError(where + ".model: alphabet differs from environment");
        if (agent.model.hypothesis_ids.size() != space.hypotheses.size())
            throw ValidationError(where + ".model: hypothesis count mismatch");
        for (std::size_t h = 0; h < space.hypotheses.size(); ++h)
            if (agent.model.hypothesis_ids[h] != space.hypotheses[h].id)
                throw ValidationError(where + ".model: hypothesis order mismatch");
        if (agent.exposure_k < 1 || agent.exposure_k > environment.bundle_size)
            throw ValidationError(where + ".exposure_k: must lie in [1, bundle_size]");
    }
    if (run.steps < 1) throw ValidationError("run.steps: must be >= 1");
    if (!(run.delta >= 0.0)) throw ValidationError("run.delta: must be >= 0");
    if (run.horizon < 1) throw ValidationError("run.horizon: must be >= 1");
}

Scenario parse_scenario(const ojson& document) {
    const Cursor root{&document, "$"};
    Scenario scenario;
    scenario.name = root.child("name").str();

    const std::vector<std::string> symbols = parse_id_array(root.child("symbols"));
    const std::vector<std::string> actions = parse_id_array(root.child("actions"));

    // Hypotheses and their outcome streams.
    const Cursor hyps = root.child("hypotheses");
    std::size_t horizon = 0;
    for (std::size_t i = 0; i < hyps.array_size(); ++i) {
        const Cursor hc = hyps.item(i);
        Hypothesis hypothesis;
        hypothesis.id = hc.child("id").str();
        hypothesis.label = hc.has("label") ? hc.child("label").str() : hypothesis.id;
        const Cursor streams = hc.child("outcome_streams");
        for (const auto& [action, node] : streams.ref().items()) {
            if (std::find(actions.begin(), actions.end(), action) == actions.end())
                throw ValidationError(streams.path + "." + action +
                                      ": action not declared");
            const Cursor sc = streams.child(action);
            std::vector<double> stream;
            for (std::size_t t = 0; t < sc.array_size(); ++t)
                stream.push_back(sc.item(t).number());
            if (stream.empty())
                throw ValidationError(sc.path + ": empty stream");
            if (horizon == 0) horizon = stream.size();
            if (stream.size() != horizon)
                throw ValidationError(sc.path + ": stream length " +
                                      std::to_string(stream.size()) +
                                      " differs from " + std::to_string(horizon));
            hypothesis.outcome_streams.emplace(action, std::move(stream));
        }
        for (const auto& action : actions)
            if (!hypothesis.outcome_streams.count(action))
                throw ValidationError(streams.path + ": missing action " + action);
        scenario.space.hypotheses.push_back(std::move(hypothesis));
    }
    scenario.space.actions = actions;

    // Environment.
    const Cursor env = root.child("environment");
    scenario.environment.symbols = symbols;
    const Cursor regimes = env.child("regimes");
    if (!regimes.ref().is_object() || regimes.ref().empty())
        throw ValidationError(regimes.path + ": expected a non-empty object");
    for (const auto& [regime_id, node] : regimes.ref().items()) {
        scenario.environment.regimes.emplace(
            regime_id,
            parse_keyed_distribution(regimes.child(regime_id), symbols,
                                     /*require_positive=*/true));
    }
    scenario.environment.active_regime = env.child("active_regime").str();
    scenario.environment.bundle_size = env.child("bundle_size").integer();
    const Cursor catalog = env.child("ground_catalog");
    for (const auto& symbol : symbols) {
        const Cursor gc = catalog.child(symbol);
        GroundSpec spec;
        spec.description_cost = gc.child("description_cost").number();
        spec.compatibility = gc.child("compatibility").number();
        scenario.environment.ground_catalog.emplace(symbol, spec);
    }
    for (const auto& [symbol, node] : catalog.ref().items())
        if (std::find(symbols.begin(), symbols.end(), symbol) == symbols.end())
            throw ValidationError(catalog.path + "." + symbol + ": undeclared symbol");
    if (env.has("interventions")) {
        const Cursor interventions = env.child("interventions");
        for (const auto& [id, node] : interventions.ref().items())
            scenario.environment.interventions.emplace(
                id, interventions.child(id).str());
    }

    // Agents.
    std::vector<std::string> hypothesis_ids;
    for (const auto& h : scenario.space.hypotheses) hypothesis_ids.push_back(h.id);
    const Cursor agents = root.child("agents");
    for (std::size_t i = 0; i < agents.array_size(); ++i) {
        const Cursor ac = agents.item(i);
        Agent agent;
        agent.id = ac.child("id").str();
        agent.exposure_k = ac.child("exposure_k").integer();
        agent.profile = parse_profile(ac.child("profile"));

        const Cursor mc = ac.child("model");
        agent.model.hypothesis_ids = hypothesis_ids;
        agent.model.symbols = symbols;
        agent.model.prior = parse_keyed_distribution(mc.child("prior"), hypothesis_ids,
                                                     /*require_positive=*/false);
        agent.model.smoothing = mc.child("smoothing").number();
        agent.model.emission_counts.assign(hypothesis_ids.size(),
                                           std::vector<double>(symbols.size(), 0.0));
        if (mc.has("emission_counts")) {
            const Cursor counts = mc.child("emission_counts");
            for (const auto& [hid, node] : counts.ref().items()) {
                auto hit = std::find(hypothesis_ids.begin(), hypothesis_ids.end(), hid);
                if (hit == hypothesis_ids.end())
                    throw ValidationError(counts.path + "." + hid +
                                          ": undeclared hypothesis");
                const std::size_t h = hit - hypothesis_ids.begin();
                const Cursor row = counts.child(hid);
                for (const auto& [symbol, cell] : row.ref().items()) {
                    auto sit = std::find(symbols.begin(), symbols.end(), symbol);
                    if (sit == symbols.end())
                        throw ValidationError(row.path + "." + symbol +
                                              ": undeclared symbol");
                    const double value = row.child(symbol).number();
                    if (!(value >= 0.0))
                        throw ValidationError(row.path + "." + symbol +
                                              ": count must be >= 0");
                    agent.model.emission_counts[h][sit - symbols.begin()] = value;
                }
            }
        }
        scenario.agents.push_back(std::move(agent));
    }

    // Run defaults.
    const Cursor run = root.child("run");
    scenario.run.steps = run.child("steps").integer();
    scenario.run.seed = run.child("seed").uint64();
    scenario.run.delta = run.child("delta").number();
    scenario.run.horizon = run.has("horizon") ? run.child("horizon").integer() : 10;

    scenario.validate();
    return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path.string());
    ojson document;
    try {
        document = ojson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("scenario parse error in " + path.string() + ": " +
                              e.what());
    }
    return parse_scenario(document);
}

ojson profile_to_json(const InferenceProfile& profile) {
    ojson j;
    j["alpha"] = profile.alpha;
    j["beta_r"] = profile.beta_r;
    j["temperature"] = profile.temperature;
    if (std::isinf(profile.tau))
        j["tau"] = "inf";
    else
        j["tau"] = profile.tau;
    j["gamma"] = profile.gamma;
    return j;
}

ojson model_to_json(const WorldModel& model) {
    ojson mj;
    ojson prior;
    for (std::size_t h = 0; h < model.hypothesis_ids.size(); ++h)
        prior[model.hypothesis_ids[h]] = model.prior[h];
    mj["prior"] = std::move(prior);
    mj["smoothing"] = model.smoothing;
    ojson counts;
    for (std::size_t h = 0; h < model.hypothesis_ids.size(); ++h) {
        ojson row;
        for (std::size_t s = 0; s < model.symbols.size(); ++s)
            row[model.symbols[s]] = model.emission_counts[h][s];
        counts[model.hypothesis_ids[h]] = std::move(row);
    }
    mj["emission_counts"] = std::move(counts);
    return mj;
}

ojson write_scenario(const Scenario& scenario) {
    ojson j;
    j["name"] = scenario.name;
    j["symbols"] = scenario.environment.symbols;

    ojson hyps = ojson::array();
    for (const auto& h : scenario.space.hypotheses) {
        ojson hj;
        hj["id"] = h.id;
        hj["label"] = h.label;
        ojson streams;
        for (const auto& action : scenario.space.actions)
            streams[action] = h.outcome_streams.at(action);
        hj["outcome_streams"] = std::move(streams);
        hyps.push_back(std::move(hj));
    }
    j["hypotheses"] = std::move(hyps);
    j["actions"] = scenario.space.actions;

    ojson env;
    ojson regimes;
    for (const auto& [regime_id, dist] : scenario.environment.regimes) {
        ojson row;
        for (std::size_t s = 0; s < dist.size(); ++s)
            row[scenario.environment.symbols[s]] = dist[s];
        regimes[regime_id] = std::move(row);
    }
    env["regimes"] = std::move(regimes);
    env["active_regime"] = scenario.environment.active_regime;
    env["bundle_size"] = scenario.environment.bundle_size;
    ojson catalog;
    for (const auto& symbol : scenario.environment.symbols) {
        const GroundSpec& spec = scenario.environment.ground_catalog.at(symbol);
        ojson gj;
        gj["description_cost"] = spec.description_cost;
        gj["compatibility"] = spec.compatibility;
        catalog[symbol] = std::move(gj);
    }
    env["ground_catalog"] = std::move(catalog);
    ojson interventions = ojson::object();
    for (const auto& [id, target] : scenario.environment.interventions)
        interventions[id] = target;
    env["interventions"] = std::move(interventions);
    j["environment"] = std::move(env);

    ojson agents = ojson::array();
    for (const auto& agent : scenario.agents) {
        ojson aj;
        aj["id"] = agent.id;
        aj["exposure_k"] = agent.exposure_k;
        aj["profile"] = profile_to_json(agent.profile);
        aj["model"] = model_to_json(agent.model);
        agents.push_back(std::move(aj));
    }
    j["agents"] = std::move(agents);

    ojson run;
    run["steps"] = scenario.run.steps;
    run["seed"] = scenario.run.seed;
    run["delta"] = scenario.run.delta;
    run["horizon"] = scenario.run.horizon;
    j["run"] = std::move(run);
    return j;
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write scenario file: " + path.string());
    out << write_scenario(scenario).dump(2) << "\n";
    if (!out) throw IoError("failed writing scenario file: " + path.string());
}

std::string scenario_content_hash(const Scenario& scenario) {
    const std::string canonical = write_scenario(scenario).dump();
    const std::uint64_t h = fnv1a64(canonical);
    static const char* digits = "0123456789abcdef";
    std::string hex(16, '0');
    for (int i = 0; i < 16; ++i)
        hex[15 - i] = digits[(h >> (4 * i)) & 0xF];
    return hex;
}

} // namespace infera
