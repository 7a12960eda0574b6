#pragma once

#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "npgi/problem.hpp"

namespace npgi {

/// Probability mass function over the states of a problem.
using Belief = std::vector<double>;

/// Observations with a prior probability at or below this value are treated
/// as impossible: their posterior is undefined and they are skipped.
inline constexpr double kZeroProb = 1e-12;

/// Joint history (a^0, z^1, ..., a^{t-1}, z^t) as flat joint indices.
struct JointHistory {
    std::vector<int> actions;
    std::vector<int> observations;

    int length() const { return static_cast<int>(actions.size()); }
    bool operator==(const JointHistory&) const = default;
    bool operator<(const JointHistory& other) const {
        return std::tie(actions, observations) < std::tie(other.actions, other.observations);
    }
};

/// One possible observation after acting in a belief.
struct Branch {
    int observation;
    double prob;       // eta(z | b, a)
    Belief posterior;  // zeta(b, a, z)
};

/// All observations with positive prior probability, in increasing
/// observation index, with their posteriors.
std::vector<Branch> successors(const Model& model, const Belief& b, int action);

/// Predicted next-state distribution sum_s P(s'|s,a) b(s).
Belief predict(const Model& model, const Belief& b, int action);

/// Posterior and prior probability of one observation. Throws
/// ZeroProbabilityObservation when the prior is (numerically) zero.
std::pair<Belief, double> bayes_update(const Model& model, const Belief& b, int action, int observation);

/// Filtered belief for a history and the history's unconditional
/// probability. The belief is empty when the probability is zero.
struct HistoryBelief {
    std::optional<Belief> belief;
    double prob = 0.0;
};

HistoryBelief history_belief(const Model& model, const JointHistory& history);

/// sum_s b(s) log2 b(s), with 0 log 0 = 0.
double neg_entropy(const Belief& b);

/// rho_t(b, a) for t < horizon.
double reward(const Model& model, int t, const Belief& b, int action);

/// rho_T(b).
double final_reward(const Model& model, const Belief& b);

}  // namespace npgi
