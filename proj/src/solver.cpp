#include "npgi/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "npgi/errors.hpp"

namespace npgi {

namespace {

// x beats the incumbent only by more than a relative margin; near-ties keep
// the earlier (lower-index) candidate.
bool better(double x, double incumbent) {
    return x > incumbent + 1e-10 * std::max(1.0, std::abs(incumbent));
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Points every in-edge of agent's node `from` (layer t) at `to`.
void redirect(LocalPolicy& policy, int t, int from, int to) {
    if (t == 0) return;
    for (auto& parent : policy.layers[t - 1]) {
        for (int& n : parent.next) {
            if (n == from) n = to;
        }
    }
}

RestartReport run_restart(const Model& model, const SolverConfig& config, int restart,
                          std::optional<Clock::time_point> deadline) {
    RestartReport report;
    report.restart = restart;
    report.seed = restart_seed(config.seed, restart);
    Rng rng(report.seed);

    report.policy = init_random_policy(model, config.width, rng);
    report.value = evaluate(model, report.policy);
    report.value_trace.push_back(report.value);

    for (int pass = 0; pass < config.max_passes; ++pass) {
        if (deadline && Clock::now() >= *deadline) {
            report.time_limit_exceeded = true;
            break;
        }
        const auto start = Clock::now();
        const NodeStats stats = forward_pass(model, report.policy, config.entry_cap);
        const auto backward_start = Clock::now();
        JointPolicy plus = backward_pass(model, report.policy, stats, config.mode, rng);
        report.backward_seconds.push_back(seconds_since(backward_start));

        const bool changed = !(plus == report.policy);
        const double value = evaluate(model, plus);
        if (value >= report.value) {
            report.policy = std::move(plus);
            report.value = value;
        }
        report.value_trace.push_back(report.value);
        report.pass_seconds.push_back(seconds_since(start));
        if (!changed) {
            report.converged = true;
            break;
        }
    }
    return report;
}

}  // namespace

std::string_view to_string(Mode mode) {
    return mode == Mode::Exact ? "exact" : "lb";
}

std::optional<Mode> parse_mode(std::string_view text) {
    if (text == "exact") return Mode::Exact;
    if (text == "lb" || text == "lower-bound") return Mode::LowerBound;
    return std::nullopt;
}

void check_config(const SolverConfig& config) {
    if (config.max_passes < 1) throw std::invalid_argument("passes must be at least 1");
    if (config.restarts < 1) throw std::invalid_argument("restarts must be at least 1");
    if (config.width < 1) throw std::invalid_argument("width must be at least 1");
    if (config.jobs < 1) throw std::invalid_argument("jobs must be at least 1");
    if (config.time_limit && config.time_limit->count() < 0) throw std::invalid_argument("negative time limit");
}

std::uint64_t restart_seed(std::uint64_t master, int restart) {
    return splitmix64(splitmix64(master) ^ static_cast<std::uint64_t>(restart));
}

NodeStats forward_pass(const Model& model, const JointPolicy& policy, std::size_t cap) {
    return compute_node_stats(model, policy, cap);
}

double NodeScores::candidate(int a, std::span<const int> next) const {
    double v = immediate[a];
    if (next_width == 0) return v;
    for (int z = 0; z < observations; ++z) v += successor(a, z, next[z]);
    return v;
}

int NodeScores::best_successor(int a, int z) const {
    int best = 0;
    for (int n = 1; n < next_width; ++n) {
        if (better(successor(a, z, n), successor(a, z, best))) best = n;
    }
    return best;
}

double NodeScores::best_total(int a) const {
    double v = immediate[a];
    if (next_width == 0) return v;
    for (int z = 0; z < observations; ++z) v += successor(a, z, best_successor(a, z));
    return v;
}

int NodeScores::best_action() const {
    int best = 0;
    double best_value = best_total(0);
    for (int a = 1; a < actions; ++a) {
        const double v = best_total(a);
        if (better(v, best_value)) {
            best = a;
            best_value = v;
        }
    }
    return best;
}

NodeScores score_node(const Model& model, const JointPolicy& plus, const NodeStats& stats, ValueFunction& values,
                      int t, int agent, int k, Mode mode) {
    const auto cross = stats.cross(t, agent, k);
    if (cross.empty()) {
        throw UnreachableNode("local node " + std::to_string(k) + " of agent " + std::to_string(agent) + ", layer " +
                              std::to_string(t));
    }
    const Problem& p = model.problem();
    const bool last = t + 1 == model.horizon();
    const JointSpace& actions = model.action_space();
    const JointSpace& observations = model.observation_space();
    const JointSpace current = plus.layer_space(t);
    const JointSpace next_layer = last ? JointSpace{} : plus.layer_space(t + 1);

    NodeScores scores;
    scores.actions = p.actions[agent];
    scores.observations = p.observations[agent];
    scores.next_width = last ? 0 : plus.agents[agent].width(t + 1);
    scores.immediate.assign(scores.actions, 0.0);
    scores.successors.assign(static_cast<std::size_t>(scores.actions) * scores.observations * scores.next_width, 0.0);

    const auto& layer = stats.layer(t);
    std::vector<std::pair<const Belief*, double>> beliefs;
    for (const auto& [q, wq] : cross) {
        beliefs.clear();
        if (mode == Mode::Exact) {
            for (int h : layer.members[q]) {
                const auto& rec = layer.histories[h];
                beliefs.emplace_back(&rec.belief, wq * rec.prob / layer.reach[q]);
            }
        } else {
            beliefs.emplace_back(&layer.expected[q], wq);
        }
        const int base_action = plus.joint_action(actions, current, t, q);

        for (const auto& [b, w] : beliefs) {
            for (int ai = 0; ai < scores.actions; ++ai) {
                const int a = actions.with_component(base_action, agent, ai);
                scores.immediate[ai] += w * reward(model, t, *b, a);
                for (const auto& br : successors(model, *b, a)) {
                    if (last) {
                        scores.immediate[ai] += w * br.prob * final_reward(model, br.posterior);
                        continue;
                    }
                    const int zi = observations.component(br.observation, agent);
                    const int base_next = plus.joint_next(observations, current, next_layer, t, q, br.observation);
                    double* row = &scores.successors[(static_cast<std::size_t>(ai) * scores.observations + zi) *
                                                     scores.next_width];
                    for (int n = 0; n < scores.next_width; ++n) {
                        const int next = next_layer.with_component(base_next, agent, n);
                        row[n] += w * br.prob * values(t + 1, br.posterior, next);
                    }
                }
            }
        }
    }
    return scores;
}

int optimize_last_step(const Model& model, const JointPolicy& plus, const NodeStats& stats, ValueFunction& values,
                       int agent, int k, Mode mode) {
    return score_node(model, plus, stats, values, model.horizon() - 1, agent, k, mode).best_action();
}

std::pair<int, std::vector<int>> optimize_step(const Model& model, const JointPolicy& plus, const NodeStats& stats,
                                               ValueFunction& values, int t, int agent, int k, Mode mode) {
    const NodeScores scores = score_node(model, plus, stats, values, t, agent, k, mode);
    const int a = scores.best_action();
    std::vector<int> next(scores.observations);
    for (int z = 0; z < scores.observations; ++z) next[z] = scores.best_successor(a, z);
    return {a, std::move(next)};
}

JointPolicy backward_pass(const Model& model, const JointPolicy& policy, const NodeStats& stats, Mode mode, Rng& rng,
                          std::vector<BackwardEvent>* log) {
    JointPolicy plus = policy;
    // Queries at layer t only reach layers above t, which are final by then,
    // so one cache serves the whole sweep.
    ValueFunction values(model, plus);
    const Problem& p = model.problem();

    for (int t = model.horizon() - 1; t >= 0; --t) {
        for (int i = 0; i < plus.agent_count(); ++i) {
            LocalPolicy& local = plus.agents[i];
            std::vector<int> settled;
            for (int k = 0; k < local.width(t); ++k) {
                if (stats.local_reach(t, i, k) <= 0.0) {
                    randomize_node(local, t, k, p.actions[i], rng);
                    if (log) log->push_back({BackwardEvent::Kind::RandomizedUnreachable, t, i, k, -1});
                    settled.push_back(k);
                    continue;
                }
                if (t + 1 == model.horizon()) {
                    local.node(t, k).action = optimize_last_step(model, plus, stats, values, i, k, mode);
                } else {
                    auto [a, next] = optimize_step(model, plus, stats, values, t, i, k, mode);
                    local.node(t, k).action = a;
                    local.node(t, k).next = std::move(next);
                }
                for (int w : settled) {
                    if (local.node(t, w) == local.node(t, k)) {
                        redirect(local, t, k, w);
                        randomize_node(local, t, k, p.actions[i], rng);
                        if (log) log->push_back({BackwardEvent::Kind::Redirected, t, i, k, w});
                        break;
                    }
                }
                settled.push_back(k);
            }
        }
    }
    return plus;
}

SolveReport solve(const Model& model, const SolverConfig& config) {
    check_config(config);
    const auto start = Clock::now();
    std::optional<Clock::time_point> deadline;
    if (config.time_limit) deadline = start + std::chrono::duration_cast<Clock::duration>(*config.time_limit);

    std::vector<std::optional<RestartReport>> slots(config.restarts);
    std::atomic<int> next_restart{0};
    std::atomic<bool> out_of_time{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const int r = next_restart.fetch_add(1);
            if (r >= config.restarts) return;
            {
                std::lock_guard lock(failure_mutex);
                if (failure) return;
            }
            if (r > 0 && deadline && Clock::now() >= *deadline) {
                out_of_time = true;
                continue;
            }
            try {
                slots[r] = run_restart(model, config, r, deadline);
                if (slots[r]->time_limit_exceeded) out_of_time = true;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const int jobs = std::min(config.jobs, config.restarts);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    SolveReport report;
    report.mode = config.mode;
    report.width = config.width;
    report.seed = config.seed;
    report.time_limit_exceeded = out_of_time;
    for (auto& slot : slots) {
        if (!slot) continue;
        report.restarts.push_back(std::move(*slot));
        const auto& r = report.restarts.back();
        if (report.best_restart < 0 || r.value > report.best_value) {
            report.best_restart = static_cast<int>(report.restarts.size()) - 1;
            report.best_value = r.value;
        }
    }
    report.best_policy = report.restarts[report.best_restart].policy;
    return report;
}

}  // namespace npgi
