#include "npgi/belief.hpp"

#include <algorithm>
#include <cmath>

#include "npgi/errors.hpp"

namespace npgi {

Belief predict(const Model& model, const Belief& b, int action) {
    Belief pred(model.states(), 0.0);
    for (int s = 0; s < model.states(); ++s) {
        if (b[s] == 0.0) continue;
        for (const auto& e : model.transitions(action, s)) pred[e.index] += e.prob * b[s];
    }
    return pred;
}

std::vector<Branch> successors(const Model& model, const Belief& b, int action) {
    const int ns = model.states();
    const Belief pred = predict(model, b, action);

    thread_local std::vector<int> slot;
    slot.assign(model.observation_space().size(), -1);

    std::vector<Branch> out;
    for (int next = 0; next < ns; ++next) {
        if (pred[next] == 0.0) continue;
        for (const auto& e : model.observations(action, next)) {
            int& k = slot[e.index];
            if (k < 0) {
                k = static_cast<int>(out.size());
                out.push_back({e.index, 0.0, Belief(ns, 0.0)});
            }
            out[k].posterior[next] = e.prob * pred[next];
        }
    }

    std::erase_if(out, [](Branch& br) {
        double eta = 0.0;
        for (double v : br.posterior) eta += v;
        br.prob = eta;
        return eta <= kZeroProb;
    });
    for (auto& br : out) {
        for (double& v : br.posterior) v /= br.prob;
    }
    std::sort(out.begin(), out.end(), [](const Branch& x, const Branch& y) { return x.observation < y.observation; });
    return out;
}

std::pair<Belief, double> bayes_update(const Model& model, const Belief& b, int action, int observation) {
    const auto& p = model.problem();
    Belief post = predict(model, b, action);
    double eta = 0.0;
    for (int next = 0; next < model.states(); ++next) {
        post[next] = post[next] == 0.0 ? 0.0 : p.observation_at(action, next, observation) * post[next];
        eta += post[next];
    }
    if (eta <= kZeroProb) {
        throw ZeroProbabilityObservation("observation " + std::to_string(observation) + " after action " +
                                         std::to_string(action) + " has zero probability");
    }
    for (double& v : post) v /= eta;
    return {std::move(post), eta};
}

HistoryBelief history_belief(const Model& model, const JointHistory& h) {
    if (h.actions.size() != h.observations.size()) {
        throw std::invalid_argument("history has mismatched action and observation counts");
    }
    if (h.length() > model.horizon()) throw std::invalid_argument("history is longer than the horizon");

    Belief b = model.problem().initial_belief;
    double prob = 1.0;
    for (int k = 0; k < h.length(); ++k) {
        try {
            auto [post, eta] = bayes_update(model, b, h.actions[k], h.observations[k]);
            b = std::move(post);
            prob *= eta;
        } catch (const ZeroProbabilityObservation&) {
            return {std::nullopt, 0.0};
        }
    }
    return {std::move(b), prob};
}

double neg_entropy(const Belief& b) {
    double sum = 0.0;
    for (double v : b) {
        if (v > 0.0) sum += v * std::log2(v);
    }
    return sum;
}

namespace {

double functional_value(BeliefFunctional f, const Belief& b) {
    switch (f) {
    case BeliefFunctional::NegEntropy:
        return neg_entropy(b);
    case BeliefFunctional::Zero:
        break;
    }
    return 0.0;
}

}  // namespace

double reward(const Model& model, int t, const Belief& b, int action) {
    const auto& r = model.problem().step_rewards.at(t);
    if (const auto* lin = std::get_if<LinearReward>(&r)) {
        const double* row = &lin->table[static_cast<std::size_t>(action) * model.states()];
        double sum = 0.0;
        for (int s = 0; s < model.states(); ++s) {
            if (b[s] != 0.0) sum += b[s] * row[s];
        }
        return sum;
    }
    const auto& bel = std::get<BeliefReward>(r);
    return functional_value(bel.functional, b) - bel.cost[action];
}

double final_reward(const Model& model, const Belief& b) {
    const auto& r = model.problem().final_reward;
    switch (r.kind) {
    case FinalReward::Kind::NegEntropy:
        return neg_entropy(b);
    case FinalReward::Kind::Linear: {
        double sum = 0.0;
        for (int s = 0; s < model.states(); ++s) sum += b[s] * r.table[s];
        return sum;
    }
    case FinalReward::Kind::Zero:
        break;
    }
    return 0.0;
}

}  // namespace npgi
