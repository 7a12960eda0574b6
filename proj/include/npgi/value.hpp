#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "npgi/belief.hpp"
#include "npgi/node_stats.hpp"
#include "npgi/policy.hpp"

namespace npgi {

/// V_t(b, q) of a fixed joint policy, evaluated from an arbitrary belief by
/// the backward recursion over observation branches.
///
/// The policy is held by reference and read on every call. With memoization
/// on, cached entries of layer t assume the policy's layers t..T-1 have not
/// changed since they were stored; callers that edit those layers must clear().
class ValueFunction {
public:
    ValueFunction(const Model& model, const JointPolicy& policy, bool memoize = true);

    /// t == horizon yields the final reward; q is ignored there.
    double operator()(int t, const Belief& b, int q);

    void clear() { memo_.clear(); }
    std::size_t memo_size() const { return memo_.size(); }

    /// Observation branches expanded so far (cache hits excluded).
    std::uint64_t expansions() const { return expansions_; }

private:
    struct Key {
        int t;
        int q;
        std::vector<std::pair<int, double>> support;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept;
    };

    double compute(int t, const Belief& b, int q);

    const Model& model_;
    const JointPolicy& policy_;
    std::vector<JointSpace> layers_;
    bool memoize_;
    std::unordered_map<Key, double, KeyHash> memo_;
    std::uint64_t expansions_ = 0;
};

/// V_0(b^0, q^0): exact expected sum of rewards of the policy.
double evaluate(const Model& model, const JointPolicy& policy);

/// Expected value of V_t(tau(h), q) over the histories ending at joint node q.
/// Throws UnreachableNode when P(q | pi) = 0.
double node_value(const Model& model, const JointPolicy& policy, const NodeStats& stats, int t, int q);
double node_value(ValueFunction& values, const NodeStats& stats, int t, int q);

/// Expected joint node value over P(q_{-i} | q_i, pi) for local node k of agent i.
double local_node_value(const Model& model, const JointPolicy& policy, const NodeStats& stats, int t, int agent,
                        int k);

/// V_t(E[tau(h) | q], q), a lower bound on node_value when rewards are convex
/// in the belief and equal to it when they are linear.
double node_value_lower_bound(const Model& model, const JointPolicy& policy, const NodeStats& stats, int t, int q);
double node_value_lower_bound(ValueFunction& values, const NodeStats& stats, int t, int q);

}  // namespace npgi
