#include "npgi/value.hpp"

#include <bit>
#include <string>

#include "npgi/errors.hpp"

namespace npgi {

namespace {

constexpr std::size_t kMaxMemoEntries = 1u << 21;

inline std::uint64_t mix(std::uint64_t h, std::uint64_t x) {
    h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

}  // namespace

std::size_t ValueFunction::KeyHash::operator()(const Key& k) const noexcept {
    std::uint64_t h = mix(static_cast<std::uint64_t>(k.t), static_cast<std::uint64_t>(k.q));
    for (const auto& [s, v] : k.support) {
        h = mix(h, static_cast<std::uint64_t>(s));
        h = mix(h, std::bit_cast<std::uint64_t>(v));
    }
    return static_cast<std::size_t>(h);
}

ValueFunction::ValueFunction(const Model& model, const JointPolicy& policy, bool memoize)
    : model_(model), policy_(policy), memoize_(memoize) {
    check_policy(model, policy);
    for (int t = 0; t < model.horizon(); ++t) layers_.push_back(policy.layer_space(t));
}

double ValueFunction::operator()(int t, const Belief& b, int q) {
    if (t == model_.horizon()) return final_reward(model_, b);
    if (!memoize_) return compute(t, b, q);

    Key key{t, q, {}};
    for (int s = 0; s < static_cast<int>(b.size()); ++s) {
        if (b[s] != 0.0) key.support.emplace_back(s, b[s]);
    }
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const double v = compute(t, b, q);
    if (memo_.size() >= kMaxMemoEntries) memo_.clear();
    memo_.emplace(std::move(key), v);
    return v;
}

double ValueFunction::compute(int t, const Belief& b, int q) {
    const int a = policy_.joint_action(model_.action_space(), layers_[t], t, q);
    double v = reward(model_, t, b, a);
    const auto branches = successors(model_, b, a);
    expansions_ += branches.size();
    if (t + 1 == model_.horizon()) {
        for (const auto& br : branches) v += br.prob * final_reward(model_, br.posterior);
        return v;
    }
    for (const auto& br : branches) {
        const int next = policy_.joint_next(model_.observation_space(), layers_[t], layers_[t + 1], t, q, br.observation);
        v += br.prob * (*this)(t + 1, br.posterior, next);
    }
    return v;
}

double evaluate(const Model& model, const JointPolicy& policy) {
    ValueFunction values(model, policy, /*memoize=*/false);
    return values(0, model.problem().initial_belief, 0);
}

double node_value(ValueFunction& values, const NodeStats& stats, int t, int q) {
    const auto& layer = stats.layer(t);
    if (layer.reach[q] <= 0.0) throw UnreachableNode("joint node " + std::to_string(q) + " of layer " + std::to_string(t));
    double v = 0.0;
    for (int h : layer.members[q]) {
        const auto& rec = layer.histories[h];
        v += rec.prob / layer.reach[q] * values(t, rec.belief, q);
    }
    return v;
}

double node_value(const Model& model, const JointPolicy& policy, const NodeStats& stats, int t, int q) {
    ValueFunction values(model, policy);
    return node_value(values, stats, t, q);
}

double local_node_value(const Model& model, const JointPolicy& policy, const NodeStats& stats, int t, int agent,
                        int k) {
    if (stats.local_reach(t, agent, k) <= 0.0) {
        throw UnreachableNode("local node " + std::to_string(k) + " of agent " + std::to_string(agent) + ", layer " +
                              std::to_string(t));
    }
    ValueFunction values(model, policy);
    double v = 0.0;
    for (const auto& [q, w] : stats.cross(t, agent, k)) v += w * node_value(values, stats, t, q);
    return v;
}

double node_value_lower_bound(ValueFunction& values, const NodeStats& stats, int t, int q) {
    const auto& layer = stats.layer(t);
    if (layer.reach[q] <= 0.0) throw UnreachableNode("joint node " + std::to_string(q) + " of layer " + std::to_string(t));
    return values(t, layer.expected[q], q);
}

double node_value_lower_bound(const Model& model, const JointPolicy& policy, const NodeStats& stats, int t, int q) {
    ValueFunction values(model, policy);
    return node_value_lower_bound(values, stats, t, q);
}

}  // namespace npgi
