#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "npgi/node_stats.hpp"
#include "npgi/policy.hpp"
#include "npgi/value.hpp"

namespace npgi {

/// Objective used when re-optimizing a node in the backward pass.
///  Exact:      expectation of the node value over the histories ending there.
///  LowerBound: node value at the expected belief (Jensen bound).
enum class Mode { Exact, LowerBound };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view text);

struct SolverConfig {
    Mode mode = Mode::LowerBound;
    int max_passes = 30;
    std::optional<std::chrono::duration<double>> time_limit;
    std::uint64_t seed = 1;
    int restarts = 1;
    int width = 2;
    int jobs = 1;
    std::size_t entry_cap = kDefaultEntryCap;
};

/// Throws std::invalid_argument for out-of-range settings.
void check_config(const SolverConfig& config);

/// Seed of one restart's private RNG stream, derived from the master seed.
std::uint64_t restart_seed(std::uint64_t master, int restart);

struct RestartReport {
    int restart = 0;
    std::uint64_t seed = 0;
    JointPolicy policy;
    double value = 0.0;
    std::vector<double> value_trace;  // [0] is the initial policy, then one entry per pass
    std::vector<double> pass_seconds;
    std::vector<double> backward_seconds;
    bool converged = false;
    bool time_limit_exceeded = false;
};

struct SolveReport {
    JointPolicy best_policy;
    double best_value = 0.0;
    int best_restart = -1;                // position in `restarts`
    std::vector<RestartReport> restarts;  // restarts that were started, in index order
    Mode mode = Mode::LowerBound;
    int width = 0;
    std::uint64_t seed = 0;
    bool time_limit_exceeded = false;

    const std::vector<double>& value_trace() const { return restarts.at(best_restart).value_trace; }
};

/// Expected joint beliefs (and the rest of the node statistics) of a policy.
NodeStats forward_pass(const Model& model, const JointPolicy& policy, std::size_t cap = kDefaultEntryCap);

/// Objective of every candidate local policy for one node, split into the
/// part that depends only on the action and, per local observation, the part
/// contributed by each possible successor. The objective of a candidate
/// (a, next[.]) is immediate[a] + sum_z successor(a, z, next[z]).
struct NodeScores {
    int actions = 0;
    int observations = 0;
    int next_width = 0;  // 0 in the last layer
    std::vector<double> immediate;
    std::vector<double> successors;

    double successor(int a, int z, int n) const {
        return successors[(static_cast<std::size_t>(a) * observations + z) * next_width + n];
    }
    double candidate(int a, std::span<const int> next) const;
    int best_successor(int a, int z) const;
    double best_total(int a) const;
    int best_action() const;
};

/// Scores node k of agent `agent` in layer t. Other agents' nodes follow
/// `plus`; the node and history distributions come from `stats`, computed for
/// the policy the pass started from. Throws UnreachableNode when the node has
/// zero reach probability.
NodeScores score_node(const Model& model, const JointPolicy& plus, const NodeStats& stats, ValueFunction& values,
                      int t, int agent, int k, Mode mode);

/// Best action for a last-layer node (lowest index on ties).
int optimize_last_step(const Model& model, const JointPolicy& plus, const NodeStats& stats, ValueFunction& values,
                       int agent, int k, Mode mode);

/// Best action and successor map for a node before the last layer.
std::pair<int, std::vector<int>> optimize_step(const Model& model, const JointPolicy& plus, const NodeStats& stats,
                                               ValueFunction& values, int t, int agent, int k, Mode mode);

struct BackwardEvent {
    enum class Kind { Redirected, RandomizedUnreachable };
    Kind kind;
    int t;
    int agent;
    int node;
    int target;  // node that received the in-edges, Redirected only
};

/// One improvement sweep over all layers from last to first. Returns the
/// policy with improved outputs and transitions; `log`, when given, receives
/// every redirect and randomization.
JointPolicy backward_pass(const Model& model, const JointPolicy& policy, const NodeStats& stats, Mode mode, Rng& rng,
                          std::vector<BackwardEvent>* log = nullptr);

/// Random restarts of forward/backward passes with monotone acceptance.
SolveReport solve(const Model& model, const SolverConfig& config);

}  // namespace npgi
