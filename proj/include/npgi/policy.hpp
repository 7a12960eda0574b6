#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "npgi/belief.hpp"
#include "npgi/joint_space.hpp"
#include "npgi/problem.hpp"

namespace npgi {

using Rng = std::mt19937_64;

/// One controller node: the action it emits and, unless it sits in the last
/// layer, the successor index in the next layer for every local observation.
struct PolicyNode {
    int action = 0;
    std::vector<int> next;
    bool operator==(const PolicyNode&) const = default;
};

/// Layered (temporally consistent) deterministic controller of one agent.
/// A node is identified by its (layer, index) pair; layer 0 holds the start node.
struct LocalPolicy {
    std::vector<std::vector<PolicyNode>> layers;

    int horizon() const { return static_cast<int>(layers.size()); }
    int width(int t) const { return static_cast<int>(layers[t].size()); }
    PolicyNode& node(int t, int k) { return layers[t][k]; }
    const PolicyNode& node(int t, int k) const { return layers[t][k]; }
    bool operator==(const LocalPolicy&) const = default;
};

/// Joint controller. Joint nodes of layer t are flat indices in layer_space(t).
struct JointPolicy {
    std::vector<LocalPolicy> agents;

    int agent_count() const { return static_cast<int>(agents.size()); }
    int horizon() const { return agents.empty() ? 0 : agents.front().horizon(); }

    JointSpace layer_space(int t) const {
        std::vector<int> widths;
        widths.reserve(agents.size());
        for (const auto& local : agents) widths.push_back(local.width(t));
        return JointSpace(std::move(widths));
    }

    /// Joint action emitted at joint node q of layer t.
    int joint_action(const JointSpace& actions, const JointSpace& layer, int t, int q) const {
        int a = 0;
        for (int i = 0; i < agent_count(); ++i) a += agents[i].node(t, layer.component(q, i)).action * actions.stride(i);
        return a;
    }

    /// Successor of joint node q (layer t) under joint observation z, as a flat
    /// index in layer t + 1.
    int joint_next(const JointSpace& observations, const JointSpace& layer, const JointSpace& next_layer, int t,
                   int q, int z) const {
        int n = 0;
        for (int i = 0; i < agent_count(); ++i) {
            const auto& node = agents[i].node(t, layer.component(q, i));
            n += node.next[observations.component(z, i)] * next_layer.stride(i);
        }
        return n;
    }

    bool operator==(const JointPolicy&) const = default;
};

/// Throws InvalidPolicy unless the policy is temporally consistent and its
/// dimensions match the model.
void check_policy(const Model& model, const JointPolicy& policy);

/// Joint node (flat index in layer h.length()) at which a history ends, or
/// nullopt when some recorded action differs from what the policy emits.
std::optional<int> ends_at(const Model& model, const JointPolicy& policy, const JointHistory& h);

/// Random policy with one start node and min(width, capacity) nodes in every
/// later layer. The last layer holds at most |A_i| nodes, and no two nodes of
/// one layer share an (action, successors) pair.
JointPolicy init_random_policy(const Model& model, int width, Rng& rng);

/// Resamples node k of layer t until it differs from every sibling. Gives up
/// after max_attempts draws and returns false if it is still a duplicate.
bool randomize_node(LocalPolicy& policy, int t, int k, int actions, Rng& rng, int max_attempts = 100);

/// Index of a sibling in the same layer with an identical local policy.
std::optional<int> find_duplicate(const LocalPolicy& policy, int t, int k);

/// Policy that emits the given joint action at every step (one node per layer).
JointPolicy open_loop_policy(const Model& model, const std::vector<int>& joint_actions);

// Policy graph file format:
//
//   agents: 2
//   horizon: 3
//   observations: 8 8
//   agent 0
//   node <t> <idx> action=<a>
//   edge <t> <idx> obs=<z> -> <idx'>
//   agent 1
//   ...
std::string serialize_policy(const JointPolicy& policy);
JointPolicy parse_policy(std::string_view text);

}  // namespace npgi
