#include "npgi/node_stats.hpp"

#include "npgi/errors.hpp"

namespace npgi {

namespace {

void summarize(LayerStats& layer, int agents) {
    const int count = layer.nodes.size();
    layer.reach.assign(count, 0.0);
    layer.members.assign(count, {});
    for (int h = 0; h < static_cast<int>(layer.histories.size()); ++h) {
        const auto& rec = layer.histories[h];
        layer.reach[rec.node] += rec.prob;
        layer.members[rec.node].push_back(h);
    }

    layer.expected.assign(count, {});
    for (int q = 0; q < count; ++q) {
        if (layer.members[q].empty()) continue;
        Belief mean(layer.histories[layer.members[q].front()].belief.size(), 0.0);
        for (int h : layer.members[q]) {
            const auto& rec = layer.histories[h];
            const double w = rec.prob / layer.reach[q];
            for (std::size_t s = 0; s < mean.size(); ++s) mean[s] += w * rec.belief[s];
        }
        layer.expected[q] = std::move(mean);
    }

    layer.local_reach.assign(agents, {});
    for (int i = 0; i < agents; ++i) {
        layer.local_reach[i].assign(layer.nodes.radix(i), 0.0);
        for (int q = 0; q < count; ++q) layer.local_reach[i][layer.nodes.component(q, i)] += layer.reach[q];
    }
}

}  // namespace

NodeStats compute_node_stats(const Model& model, const JointPolicy& policy, std::size_t cap) {
    check_policy(model, policy);
    const int horizon = model.horizon();
    const auto entries_per_history = static_cast<std::size_t>(model.states());

    NodeStats stats;
    stats.layers.resize(horizon);

    auto& first = stats.layers[0];
    first.nodes = policy.layer_space(0);
    first.histories.push_back({1.0, model.problem().initial_belief, 0, -1, -1, -1});
    summarize(first, policy.agent_count());

    for (int t = 1; t < horizon; ++t) {
        const auto& prev = stats.layers[t - 1];
        auto& cur = stats.layers[t];
        cur.nodes = policy.layer_space(t);
        for (int h = 0; h < static_cast<int>(prev.histories.size()); ++h) {
            const auto& rec = prev.histories[h];
            const int a = policy.joint_action(model.action_space(), prev.nodes, t - 1, rec.node);
            for (auto& br : successors(model, rec.belief, a)) {
                const int next =
                    policy.joint_next(model.observation_space(), prev.nodes, cur.nodes, t - 1, rec.node, br.observation);
                cur.histories.push_back({rec.prob * br.prob, std::move(br.posterior), next, h, a, br.observation});
                if (cur.histories.size() * entries_per_history > cap) {
                    throw CombinatorialLimitExceeded(cur.histories.size() * entries_per_history, cap);
                }
            }
        }
        summarize(cur, policy.agent_count());
    }
    return stats;
}

std::vector<std::pair<int, double>> NodeStats::cross(int t, int agent, int k) const {
    const auto& layer = layers[t];
    std::vector<std::pair<int, double>> out;
    const double local = layer.local_reach[agent][k];
    if (local <= 0.0) return out;
    for (int q = 0; q < layer.nodes.size(); ++q) {
        if (layer.nodes.component(q, agent) == k && layer.reach[q] > 0.0) out.emplace_back(q, layer.reach[q] / local);
    }
    return out;
}

std::vector<std::pair<JointHistory, double>> NodeStats::history_dist(int t, int q) const {
    const auto& layer = layers[t];
    std::vector<std::pair<JointHistory, double>> out;
    for (int h : layer.members[q]) out.emplace_back(history(t, h), layer.histories[h].prob / layer.reach[q]);
    return out;
}

JointHistory NodeStats::history(int t, int index) const {
    JointHistory h;
    h.actions.resize(t);
    h.observations.resize(t);
    for (int k = t; k > 0; --k) {
        const auto& rec = layers[k].histories[index];
        h.actions[k - 1] = rec.action;
        h.observations[k - 1] = rec.observation;
        index = rec.parent;
    }
    return h;
}

}  // namespace npgi
