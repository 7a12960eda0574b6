#pragma once

// Reference computations for tests. Everything here works on the dense
// Problem tables and the raw policy graph data, with no use of the library's
// filtering, statistics or evaluation code.

#include <vector>

#include "npgi/policy.hpp"
#include "npgi/problem.hpp"

namespace oracle {

using Dist = std::vector<double>;

/// Local index of `agent` inside a flat joint index (agent 0 most significant).
int digit(int flat, const std::vector<int>& radices, int agent);
int flatten(const std::vector<int>& locals, const std::vector<int>& radices);

/// Unnormalized posterior; the normalizer is returned through eta.
Dist unnormalized_posterior(const npgi::Problem& p, const Dist& b, int a, int z);
Dist posterior(const npgi::Problem& p, const Dist& b, int a, int z, double& eta);

double entropy_bits(const Dist& b);  // sum b log2 b
double step_reward(const npgi::Problem& p, int t, const Dist& b, int a);
double terminal_reward(const npgi::Problem& p, const Dist& b);

/// V_t(b, q) with q given as one local node per agent.
double value_from(const npgi::Problem& p, const npgi::JointPolicy& policy, int t, const Dist& b,
                  const std::vector<int>& nodes);
double value(const npgi::Problem& p, const npgi::JointPolicy& policy);

struct History {
    double prob;
    Dist belief;
    std::vector<int> nodes;  // local node per agent
    std::vector<int> actions;
    std::vector<int> observations;
};

/// Every length-t history consistent with the policy and of positive
/// probability, found by trying all joint observation sequences.
std::vector<History> histories(const npgi::Problem& p, const npgi::JointPolicy& policy, int t);

/// Every observation sequence after the given joint actions, with its
/// probability. Beliefs are left empty when the probability is zero.
std::vector<History> observation_sequences(const npgi::Problem& p, const std::vector<int>& actions);

/// Optimal value over every deterministic joint policy tree.
double optimal_value(const npgi::Problem& p);

}  // namespace oracle
