#pragma once

#include <vector>

#include "npgi/policy.hpp"

namespace npgi {

struct BlindResult {
    JointPolicy policy;
    int joint_action = 0;
    double value = 0.0;
};

/// Best policy that repeats one joint action at every step (lowest index on ties).
BlindResult best_blind_policy(const Model& model);

struct OpenLoopResult {
    std::vector<int> actions;  // joint action per step
    double value = 0.0;
    bool exhaustive = true;    // false: stepwise greedy heuristic
};

inline constexpr double kDefaultOpenLoopCap = 1e5;

/// Best observation-ignoring joint action sequence. Exhaustive when
/// |A|^T <= cap; above that, actions are picked one step at a time as if the
/// horizon ended right after the step, and the result is only a heuristic.
OpenLoopResult greedy_open_loop(const Model& model, double cap = kDefaultOpenLoopCap);

struct OracleResult {
    JointPolicy policy;
    double value = 0.0;
    double enumerated = 0.0;  // joint policy trees evaluated
};

inline constexpr double kDefaultOracleCap = 1e6;

/// Number of deterministic joint policy trees of depth T.
double policy_tree_count(const Problem& problem);

/// Optimal value over all deterministic joint policy trees, by exhaustive
/// enumeration. Throws CapExceeded when policy_tree_count exceeds cap.
OracleResult brute_force_optimal(const Model& model, double cap = kDefaultOracleCap);

}  // namespace npgi
