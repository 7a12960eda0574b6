#include "npgi/baselines.hpp"

#include <cmath>
#include <limits>

#include "npgi/errors.hpp"
#include "npgi/value.hpp"

namespace npgi {

namespace {

bool better(double x, double incumbent) {
    return x > incumbent + 1e-10 * std::max(1.0, std::abs(incumbent));
}

using Weighted = std::vector<std::pair<double, Belief>>;

struct SequenceSearch {
    const Model& model;
    std::vector<int> prefix;
    std::vector<int> best;
    double best_value = -std::numeric_limits<double>::infinity();

    void run(int t, const Weighted& dist, double accumulated) {
        if (t == model.horizon()) {
            for (const auto& [p, b] : dist) accumulated += p * final_reward(model, b);
            if (best.empty() || better(accumulated, best_value)) {
                best = prefix;
                best_value = accumulated;
            }
            return;
        }
        for (int a = 0; a < model.action_space().size(); ++a) {
            double gained = 0.0;
            Weighted next;
            for (const auto& [p, b] : dist) {
                gained += p * reward(model, t, b, a);
                for (auto& br : successors(model, b, a)) next.emplace_back(p * br.prob, std::move(br.posterior));
            }
            prefix.push_back(a);
            run(t + 1, next, accumulated + gained);
            prefix.pop_back();
        }
    }
};

// One deterministic tree per agent: layer t holds |Z_i|^t nodes and node k
// moves to k * |Z_i| + z.
LocalPolicy make_tree(int horizon, int observations, const std::vector<int>& actions) {
    LocalPolicy tree;
    std::size_t offset = 0;
    int width = 1;
    for (int t = 0; t < horizon; ++t) {
        std::vector<PolicyNode> layer(width);
        for (int k = 0; k < width; ++k) {
            layer[k].action = actions[offset + k];
            if (t + 1 < horizon) {
                for (int z = 0; z < observations; ++z) layer[k].next.push_back(k * observations + z);
            }
        }
        offset += width;
        width *= observations;
        tree.layers.push_back(std::move(layer));
    }
    return tree;
}

std::vector<LocalPolicy> all_trees(int horizon, int actions, int observations) {
    int nodes = 0;
    for (int t = 0, w = 1; t < horizon; ++t, w *= observations) nodes += w;
    std::vector<int> assignment(nodes, 0);
    std::vector<LocalPolicy> trees;
    for (;;) {
        trees.push_back(make_tree(horizon, observations, assignment));
        int pos = nodes - 1;
        while (pos >= 0 && ++assignment[pos] == actions) assignment[pos--] = 0;
        if (pos < 0) break;
    }
    return trees;
}

}  // namespace

BlindResult best_blind_policy(const Model& model) {
    BlindResult result;
    for (int a = 0; a < model.action_space().size(); ++a) {
        JointPolicy policy = open_loop_policy(model, std::vector<int>(model.horizon(), a));
        const double v = evaluate(model, policy);
        if (a == 0 || better(v, result.value)) {
            result.policy = std::move(policy);
            result.joint_action = a;
            result.value = v;
        }
    }
    return result;
}

OpenLoopResult greedy_open_loop(const Model& model, double cap) {
    const int joint = model.action_space().size();
    const int horizon = model.horizon();
    OpenLoopResult result;
    result.exhaustive = std::pow(static_cast<double>(joint), horizon) <= cap;

    if (result.exhaustive) {
        SequenceSearch search{model, {}, {}};
        search.run(0, {{1.0, model.problem().initial_belief}}, 0.0);
        result.actions = std::move(search.best);
    } else {
        Weighted dist{{1.0, model.problem().initial_belief}};
        for (int t = 0; t < horizon; ++t) {
            int best = 0;
            double best_score = 0.0;
            Weighted best_next;
            for (int a = 0; a < joint; ++a) {
                double score = 0.0;
                Weighted next;
                for (const auto& [p, b] : dist) {
                    score += p * reward(model, t, b, a);
                    for (auto& br : successors(model, b, a)) {
                        score += p * br.prob * final_reward(model, br.posterior);
                        next.emplace_back(p * br.prob, std::move(br.posterior));
                    }
                }
                if (a == 0 || better(score, best_score)) {
                    best = a;
                    best_score = score;
                    best_next = std::move(next);
                }
            }
            result.actions.push_back(best);
            dist = std::move(best_next);
        }
    }
    result.value = evaluate(model, open_loop_policy(model, result.actions));
    return result;
}

double policy_tree_count(const Problem& problem) {
    double count = 1.0;
    for (int i = 0; i < problem.agents; ++i) {
        double nodes = 0.0;
        for (int t = 0; t < problem.horizon; ++t) nodes += std::pow(static_cast<double>(problem.observations[i]), t);
        count *= std::pow(static_cast<double>(problem.actions[i]), nodes);
    }
    return count;
}

OracleResult brute_force_optimal(const Model& model, double cap) {
    const Problem& p = model.problem();
    const double count = policy_tree_count(p);
    if (count > cap) throw CapExceeded(count);

    std::vector<std::vector<LocalPolicy>> trees;
    for (int i = 0; i < p.agents; ++i) trees.push_back(all_trees(p.horizon, p.actions[i], p.observations[i]));

    OracleResult result;
    std::vector<std::size_t> pick(p.agents, 0);
    JointPolicy policy;
    policy.agents.resize(p.agents);
    for (;;) {
        for (int i = 0; i < p.agents; ++i) policy.agents[i] = trees[i][pick[i]];
        const double v = evaluate(model, policy);
        if (result.enumerated == 0.0 || better(v, result.value)) {
            result.policy = policy;
            result.value = v;
        }
        result.enumerated += 1.0;

        int i = p.agents - 1;
        while (i >= 0 && ++pick[i] == trees[i].size()) pick[i--] = 0;
        if (i < 0) break;
    }
    return result;
}

}  // namespace npgi
