#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "npgi/belief.hpp"
#include "npgi/policy.hpp"

namespace npgi {

/// Default bound on history entries (histories times |S|) kept per layer.
inline constexpr std::size_t kDefaultEntryCap = 10'000'000;

/// A consistent, positive-probability joint history. Histories form a tree
/// through parent links into the previous layer.
struct HistoryRecord {
    double prob;    // P(h)
    Belief belief;  // tau(h)
    int node;       // joint node the history ends at
    int parent;     // index in the previous layer, -1 for the empty history
    int action;     // last joint action, -1 for the empty history
    int observation;
};

struct LayerStats {
    JointSpace nodes;
    std::vector<HistoryRecord> histories;
    std::vector<double> reach;              // P(q | pi) per joint node
    std::vector<std::vector<int>> members;  // histories ending at each joint node
    std::vector<Belief> expected;           // E[tau(h) | q]; empty when unreachable
    std::vector<std::vector<double>> local_reach;  // P(q_i | pi), [agent][local node]
};

/// Node reachability statistics of one joint policy.
class NodeStats {
public:
    std::vector<LayerStats> layers;  // t = 0 .. T-1

    const LayerStats& layer(int t) const { return layers.at(t); }
    double reach(int t, int q) const { return layers[t].reach[q]; }
    double local_reach(int t, int agent, int k) const { return layers[t].local_reach[agent][k]; }
    const Belief& expected_belief(int t, int q) const { return layers[t].expected[q]; }

    /// Joint nodes (q_{-i}, q_i = k) paired with P(q_{-i} | q_i, pi), restricted
    /// to positive probability. Empty when P(q_i | pi) = 0.
    std::vector<std::pair<int, double>> cross(int t, int agent, int k) const;

    /// P(h | q, pi) over the histories ending at q.
    std::vector<std::pair<JointHistory, double>> history_dist(int t, int q) const;

    /// Full action/observation sequence of a stored history.
    JointHistory history(int t, int index) const;
};

/// Enumerates every consistent history with positive probability, layer by
/// layer. Throws CombinatorialLimitExceeded when a layer needs more than
/// `cap` belief entries.
NodeStats compute_node_stats(const Model& model, const JointPolicy& policy, std::size_t cap = kDefaultEntryCap);

}  // namespace npgi
