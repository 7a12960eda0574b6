#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "npgi/joint_space.hpp"

namespace npgi {

/// Probability rows must sum to one within this tolerance.
inline constexpr double kNormTolerance = 1e-9;

/// Built-in belief functionals. Every entry is convex on the belief simplex.
enum class BeliefFunctional { Zero, NegEntropy };

/// rho_t(b, a) = sum_s b(s) R_t(s, a). Table laid out as [joint action][state].
struct LinearReward {
    std::vector<double> table;
    bool operator==(const LinearReward&) const = default;
};

/// rho_t(b, a) = f(b) - c(a).
struct BeliefReward {
    BeliefFunctional functional = BeliefFunctional::Zero;
    std::vector<double> cost;  // per joint action
    bool operator==(const BeliefReward&) const = default;
};

using StepReward = std::variant<LinearReward, BeliefReward>;

struct FinalReward {
    enum class Kind { Zero, NegEntropy, Linear };
    Kind kind = Kind::Zero;
    std::vector<double> table;  // per state, Linear only
    bool operator==(const FinalReward&) const = default;
};

struct Labels {
    std::vector<std::string> states;
    std::vector<std::vector<std::string>> actions;       // [agent][local action]
    std::vector<std::vector<std::string>> observations;  // [agent][local observation]
    bool operator==(const Labels&) const = default;
    bool empty() const { return states.empty() && actions.empty() && observations.empty(); }
};

/// A finite-horizon Dec-POMDP with dense probability tables.
///
/// transition is laid out as [joint action][state][next state] and observation
/// as [joint action][next state][joint observation]. Joint indices follow
/// JointSpace (agent 0 most significant).
struct Problem {
    int agents = 1;
    int states = 1;
    std::vector<int> actions;       // per agent
    std::vector<int> observations;  // per agent
    int horizon = 1;
    std::vector<double> initial_belief;
    std::vector<double> transition;
    std::vector<double> observation;
    std::vector<StepReward> step_rewards;  // one per t = 0..horizon-1
    FinalReward final_reward;
    Labels labels;

    JointSpace action_space() const { return JointSpace(actions); }
    JointSpace observation_space() const { return JointSpace(observations); }
    int joint_actions() const { return product(actions); }
    int joint_observations() const { return product(observations); }

    /// Allocates zeroed tables for the declared dimensions.
    void allocate();

    double& transition_at(int a, int s, int next) {
        return transition[(static_cast<std::size_t>(a) * states + s) * states + next];
    }
    double transition_at(int a, int s, int next) const {
        return transition[(static_cast<std::size_t>(a) * states + s) * states + next];
    }
    double& observation_at(int a, int next, int z) {
        return observation[(static_cast<std::size_t>(a) * states + next) * joint_observations() + z];
    }
    double observation_at(int a, int next, int z) const {
        return observation[(static_cast<std::size_t>(a) * states + next) * joint_observations() + z];
    }

    bool operator==(const Problem&) const = default;

private:
    static int product(const std::vector<int>& sizes) {
        int n = 1;
        for (int k : sizes) n *= k;
        return n;
    }
};

/// Human-readable list of violated invariants; empty means valid.
struct ValidationReport {
    std::vector<std::string> issues;
    bool ok() const { return issues.empty(); }
};

ValidationReport validate(const Problem& problem);

/// True when every reward is linear in the belief.
bool has_linear_rewards(const Problem& problem);

/// A validated problem with sparse row indices for fast filtering.
/// Immutable after construction and safe to share between threads.
class Model {
public:
    struct Entry {
        int index;
        double prob;
    };

    /// Throws InvalidProblem listing every issue when validation fails.
    explicit Model(Problem problem);

    const Problem& problem() const noexcept { return problem_; }
    int states() const noexcept { return problem_.states; }
    int agents() const noexcept { return problem_.agents; }
    int horizon() const noexcept { return problem_.horizon; }
    const JointSpace& action_space() const noexcept { return action_space_; }
    const JointSpace& observation_space() const noexcept { return observation_space_; }

    /// Nonzero P(s'|s,a) entries.
    std::span<const Entry> transitions(int a, int s) const {
        const std::size_t row = static_cast<std::size_t>(a) * problem_.states + s;
        return {trans_entries_.data() + trans_offsets_[row], trans_entries_.data() + trans_offsets_[row + 1]};
    }

    /// Nonzero P(z|s',a) entries.
    std::span<const Entry> observations(int a, int next) const {
        const std::size_t row = static_cast<std::size_t>(a) * problem_.states + next;
        return {obs_entries_.data() + obs_offsets_[row], obs_entries_.data() + obs_offsets_[row + 1]};
    }

private:
    Problem problem_;
    JointSpace action_space_;
    JointSpace observation_space_;
    std::vector<std::size_t> trans_offsets_;
    std::vector<Entry> trans_entries_;
    std::vector<std::size_t> obs_offsets_;
    std::vector<Entry> obs_entries_;
};

}  // namespace npgi
