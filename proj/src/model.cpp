#include "infera/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "infera/error.hpp"
#include "infera/numeric.hpp"

namespace infera {

std::size_t HypothesisSpace::index_of(const std::string& hypothesis_id) const {
    for (std::size_t i = 0; i < hypotheses.size(); ++i)
        if (hypotheses[i].id == hypothesis_id) return i;
    throw UnknownIdError("unknown hypothesis id: " + hypothesis_id);
}

void HypothesisSpace::validate() const {
    if (hypotheses.empty()) throw ValidationError("hypotheses: empty");
    if (actions.empty()) throw ValidationError("actions: empty");
    std::set<std::string> seen;
    for (const auto& h : hypotheses)
        if (!seen.insert(h.id).second)
            throw ValidationError("hypotheses: duplicate id " + h.id);
    seen.clear();
    for (const auto& a : actions)
        if (!seen.insert(a).second)
            throw ValidationError("actions: duplicate id " + a);

    std::size_t horizon = 0;
    for (const auto& h : hypotheses) {
        for (const auto& action : actions) {
            auto it = h.outcome_streams.find(action);
            if (it == h.outcome_streams.end())
                throw ValidationError("hypotheses." + h.id +
                                      ".outcome_streams: missing action " + action);
            if (it->second.empty())
                throw ValidationError("hypotheses." + h.id + ".outcome_streams." +
                                      action + ": empty stream");
            if (horizon == 0) horizon = it->second.size();
            if (it->second.size() != horizon)
                throw ValidationError("hypotheses." + h.id + ".outcome_streams." +
                                      action + ": stream length differs from " +
                                      std::to_string(horizon));
        }
        if (h.outcome_streams.size() != actions.size())
            throw ValidationError("hypotheses." + h.id +
                                  ".outcome_streams: references an undeclared action");
    }
}

void LatentState::validate() const {
    if (!is_distribution(posterior))
        throw ContractError("LatentState: posterior is not a distribution");
}

std::size_t WorldModel::hypothesis_index(const std::string& id) const {
    for (std::size_t i = 0; i < hypothesis_ids.size(); ++i)
        if (hypothesis_ids[i] == id) return i;
    throw UnknownIdError("unknown hypothesis id: " + id);
}

std::size_t WorldModel::symbol_index(const std::string& symbol) const {
    for (std::size_t i = 0; i < symbols.size(); ++i)
        if (symbols[i] == symbol) return i;
    throw UnknownIdError("unknown symbol: " + symbol);
}

void WorldModel::validate() const {
    if (hypothesis_ids.empty()) throw ValidationError("model: no hypotheses");
    if (symbols.empty()) throw ValidationError("model: empty alphabet");
    if (!(smoothing > 0.0) || !std::isfinite(smoothing))
        throw ValidationError("model.smoothing: must be finite and > 0");
    if (prior.size() != hypothesis_ids.size())
        throw ValidationError("model.prior: size mismatch");
    if (!is_distribution(prior))
        throw ValidationError("model.prior: entries must be >= 0 and sum to 1");
    if (emission_counts.size() != hypothesis_ids.size())
        throw ValidationError("model.emission_counts: row count mismatch");
    for (std::size_t h = 0; h < emission_counts.size(); ++h) {
        if (emission_counts[h].size() != symbols.size())
            throw ValidationError("model.emission_counts." + hypothesis_ids[h] +
                                  ": column count mismatch");
        for (double c : emission_counts[h])
            if (!(c >= 0.0) || !std::isfinite(c))
                throw ValidationError("model.emission_counts." + hypothesis_ids[h] +
                                      ": negative or non-finite count");
    }
}

double emission_prob(const WorldModel& model, std::size_t h, std::size_t s) {
    const auto& row = model.emission_counts[h];
    double denom = 0.0;
    for (double c : row) denom += c + model.smoothing;
    return (row[s] + model.smoothing) / denom;
}

double emission_prob(const WorldModel& model, const std::string& hypothesis_id,
                     const std::string& symbol) {
    return emission_prob(model, model.hypothesis_index(hypothesis_id),
                         model.symbol_index(symbol));
}

double log_emission_prob(const WorldModel& model, std::size_t h, std::size_t s) {
    return std::log(emission_prob(model, h, s));
}

LatentState weighted_posterior(const WorldModel& model, const Observation& obs,
                               std::span<const double> weights) {
    if (obs.grounds.empty())
        throw ContractError("weighted_posterior: observation has no grounds");
    if (weights.size() != obs.grounds.size())
        throw ContractError("weighted_posterior: weights do not align with grounds");
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ContractError("weighted_posterior: negative weight");
        wsum += w;
    }
    if (std::fabs(wsum - 1.0) > 1e-9)
        throw ContractError("weighted_posterior: weights must sum to 1");

    std::vector<std::size_t> symbol_of(obs.grounds.size());
    for (std::size_t i = 0; i < obs.grounds.size(); ++i)
        symbol_of[i] = model.symbol_index(obs.grounds[i].symbol);

    const double total_evidence = static_cast<double>(obs.grounds.size());
    std::vector<double> log_post(model.hypothesis_ids.size());
    for (std::size_t h = 0; h < log_post.size(); ++h) {
        double lp = std::log(model.prior[h]);
        for (std::size_t i = 0; i < symbol_of.size(); ++i)
            lp += weights[i] * total_evidence * log_emission_prob(model, h, symbol_of[i]);
        log_post[h] = lp;
    }
    return LatentState{normalized_from_log(log_post), obs.step};
}

double predictive_distribution(const WorldModel& model, const LatentState& state,
                               const std::string& symbol) {
    if (state.posterior.size() != model.hypothesis_ids.size())
        throw ContractError("predictive_distribution: state does not match model");
    const std::size_t s = model.symbol_index(symbol);
    double p = 0.0;
    for (std::size_t h = 0; h < state.posterior.size(); ++h)
        p += state.posterior[h] * emission_prob(model, h, s);
    return p;
}

std::vector<double> predictive_mixture(const WorldModel& model,
                                       std::span<const double> posterior) {
    if (posterior.size() != model.hypothesis_ids.size())
        throw ContractError("predictive_mixture: posterior does not match model");
    std::vector<double> mix(model.symbols.size(), 0.0);
    for (std::size_t h = 0; h < posterior.size(); ++h)
        for (std::size_t s = 0; s < mix.size(); ++s)
            mix[s] += posterior[h] * emission_prob(model, h, s);
    return mix;
}

} // namespace infera
