#include "npgi/problem.hpp"

#include <cmath>
#include <sstream>

#include "npgi/errors.hpp"

namespace npgi {

namespace {

std::string fmt_real(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

class IssueList {
public:
    explicit IssueList(ValidationReport& report) : report_(report) {}

    void add(std::string issue) {
        if (report_.issues.size() < kMaxIssues) {
            report_.issues.push_back(std::move(issue));
        } else if (!truncated_) {
            report_.issues.push_back("further issues omitted");
            truncated_ = true;
        }
    }

private:
    static constexpr std::size_t kMaxIssues = 200;
    ValidationReport& report_;
    bool truncated_ = false;
};

void check_distribution(IssueList& issues, const std::string& what, const double* row, int n) {
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        if (!std::isfinite(row[k]) || row[k] < 0.0) {
            issues.add(what + ": entry " + std::to_string(k) + " is " + fmt_real(row[k]));
        }
        sum += row[k];
    }
    if (std::abs(sum - 1.0) > kNormTolerance) {
        issues.add(what + " sums to " + fmt_real(sum) + " (deficit " + fmt_real(1.0 - sum) + ")");
    }
}

}  // namespace

void Problem::allocate() {
    const auto a = static_cast<std::size_t>(joint_actions());
    const auto s = static_cast<std::size_t>(states);
    const auto z = static_cast<std::size_t>(joint_observations());
    initial_belief.assign(s, 0.0);
    transition.assign(a * s * s, 0.0);
    observation.assign(a * s * z, 0.0);
    step_rewards.assign(horizon, LinearReward{std::vector<double>(a * s, 0.0)});
    final_reward = FinalReward{};
}

ValidationReport validate(const Problem& p) {
    ValidationReport report;
    IssueList issues(report);

    if (p.agents < 1) issues.add("agents must be at least 1");
    if (p.states < 1) issues.add("states must be at least 1");
    if (p.horizon < 1) issues.add("horizon must be at least 1");
    if (static_cast<int>(p.actions.size()) != p.agents) {
        issues.add("actions lists " + std::to_string(p.actions.size()) + " agents, expected " +
                   std::to_string(p.agents));
    }
    if (static_cast<int>(p.observations.size()) != p.agents) {
        issues.add("observations lists " + std::to_string(p.observations.size()) + " agents, expected " +
                   std::to_string(p.agents));
    }
    for (std::size_t i = 0; i < p.actions.size(); ++i) {
        if (p.actions[i] < 1) issues.add("agent " + std::to_string(i) + " has no actions");
    }
    for (std::size_t i = 0; i < p.observations.size(); ++i) {
        if (p.observations[i] < 1) issues.add("agent " + std::to_string(i) + " has no observations");
    }
    if (!report.ok()) return report;

    const int na = p.joint_actions();
    const int nz = p.joint_observations();
    const int ns = p.states;
    const auto sz = [](std::size_t x) { return std::to_string(x); };

    bool dims_ok = true;
    if (p.initial_belief.size() != static_cast<std::size_t>(ns)) {
        issues.add("initial belief has " + sz(p.initial_belief.size()) + " entries, expected " + sz(ns));
        dims_ok = false;
    }
    if (p.transition.size() != static_cast<std::size_t>(na) * ns * ns) {
        issues.add("transition table has " + sz(p.transition.size()) + " entries, expected " +
                   sz(static_cast<std::size_t>(na) * ns * ns));
        dims_ok = false;
    }
    if (p.observation.size() != static_cast<std::size_t>(na) * ns * nz) {
        issues.add("observation table has " + sz(p.observation.size()) + " entries, expected " +
                   sz(static_cast<std::size_t>(na) * ns * nz));
        dims_ok = false;
    }
    if (p.step_rewards.size() != static_cast<std::size_t>(p.horizon)) {
        issues.add("step rewards given for " + sz(p.step_rewards.size()) + " steps, expected " +
                   std::to_string(p.horizon));
    }
    for (std::size_t t = 0; t < p.step_rewards.size(); ++t) {
        const auto& r = p.step_rewards[t];
        if (const auto* lin = std::get_if<LinearReward>(&r)) {
            if (lin->table.size() != static_cast<std::size_t>(na) * ns) {
                issues.add("linear reward at t=" + sz(t) + " has " + sz(lin->table.size()) + " entries, expected " +
                           sz(static_cast<std::size_t>(na) * ns));
            }
            for (double v : lin->table) {
                if (!std::isfinite(v)) {
                    issues.add("linear reward at t=" + sz(t) + " is not finite");
                    break;
                }
            }
        } else {
            const auto& bel = std::get<BeliefReward>(r);
            if (bel.cost.size() != static_cast<std::size_t>(na)) {
                issues.add("belief reward cost at t=" + sz(t) + " has " + sz(bel.cost.size()) +
                           " entries, expected " + sz(na));
            }
        }
    }
    if (p.final_reward.kind == FinalReward::Kind::Linear &&
        p.final_reward.table.size() != static_cast<std::size_t>(ns)) {
        issues.add("linear final reward has " + sz(p.final_reward.table.size()) + " entries, expected " + sz(ns));
    }
    if (!dims_ok) return report;

    check_distribution(issues, "initial belief", p.initial_belief.data(), ns);
    for (int a = 0; a < na; ++a) {
        for (int s = 0; s < ns; ++s) {
            check_distribution(issues, "transition row (s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")",
                               &p.transition[(static_cast<std::size_t>(a) * ns + s) * ns], ns);
        }
    }
    for (int a = 0; a < na; ++a) {
        for (int s = 0; s < ns; ++s) {
            check_distribution(issues,
                               "observation row (s'=" + std::to_string(s) + ", a=" + std::to_string(a) + ")",
                               &p.observation[(static_cast<std::size_t>(a) * ns + s) * nz], nz);
        }
    }
    return report;
}

bool has_linear_rewards(const Problem& p) {
    for (const auto& r : p.step_rewards) {
        if (const auto* bel = std::get_if<BeliefReward>(&r); bel && bel->functional != BeliefFunctional::Zero) {
            return false;
        }
    }
    return p.final_reward.kind != FinalReward::Kind::NegEntropy;
}

Model::Model(Problem problem) : problem_(std::move(problem)) {
    if (auto report = validate(problem_); !report.ok()) {
        std::string msg = "invalid problem:";
        for (const auto& issue : report.issues) msg += "\n  " + issue;
        throw InvalidProblem(msg);
    }
    action_space_ = problem_.action_space();
    observation_space_ = problem_.observation_space();

    const int na = action_space_.size();
    const int nz = observation_space_.size();
    const int ns = problem_.states;
    const std::size_t rows = static_cast<std::size_t>(na) * ns;

    trans_offsets_.assign(rows + 1, 0);
    obs_offsets_.assign(rows + 1, 0);
    for (std::size_t row = 0; row < rows; ++row) {
        const double* t = &problem_.transition[row * ns];
        for (int next = 0; next < ns; ++next) {
            if (t[next] > 0.0) trans_entries_.push_back({next, t[next]});
        }
        trans_offsets_[row + 1] = trans_entries_.size();

        const double* o = &problem_.observation[row * nz];
        for (int z = 0; z < nz; ++z) {
            if (o[z] > 0.0) obs_entries_.push_back({z, o[z]});
        }
        obs_offsets_[row + 1] = obs_entries_.size();
    }
}

}  // namespace npgi
