#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "npgi/baselines.hpp"
#include "npgi/domains.hpp"
#include "npgi/errors.hpp"
#include "npgi/solver.hpp"
#include "support/oracle.hpp"
#include "support/random_problem.hpp"

using namespace npgi;
using testing_support::random_policy;
using testing_support::random_problem;

namespace {

LocalPolicy layered(const std::vector<std::vector<PolicyNode>>& layers) {
    LocalPolicy local;
    local.layers = layers;
    return local;
}

// Same sensing toy as the policy tests: action 0 reveals a static binary
// state, action 1 observes a coin flip, final reward is negative entropy.
Problem sensing_toy(int horizon) {
    Problem p;
    p.agents = 1;
    p.states = 2;
    p.actions = {2};
    p.observations = {2};
    p.horizon = horizon;
    p.allocate();
    p.initial_belief = {0.5, 0.5};
    for (int a = 0; a < 2; ++a) {
        for (int s = 0; s < 2; ++s) {
            p.transition_at(a, s, s) = 1.0;
            p.observation_at(a, s, 0) = a == 0 ? (s == 0) : 0.5;
            p.observation_at(a, s, 1) = a == 0 ? (s == 1) : 0.5;
        }
    }
    p.final_reward.kind = FinalReward::Kind::NegEntropy;
    return p;
}

// Objective of installing `node` at (t, agent, k), computed with the dense
// reference recursion over the histories (or expected beliefs) of each
// joint node that contains k.
double reference_objective(const Problem& p, JointPolicy plus, const NodeStats& stats, int t, int agent, int k,
                           Mode mode, const PolicyNode& node) {
    plus.agents[agent].node(t, k) = node;
    const auto& layer = stats.layer(t);
    double v = 0.0;
    for (const auto& [q, w] : stats.cross(t, agent, k)) {
        const auto nodes = layer.nodes.decode(q);
        if (mode == Mode::LowerBound) {
            v += w * oracle::value_from(p, plus, t, layer.expected[q], nodes);
            continue;
        }
        for (int h : layer.members[q]) {
            const auto& rec = layer.histories[h];
            v += w * rec.prob / layer.reach[q] * oracle::value_from(p, plus, t, rec.belief, nodes);
        }
    }
    return v;
}

std::vector<PolicyNode> all_candidates(int actions, int observations, int next_width) {
    std::vector<PolicyNode> out;
    for (int a = 0; a < actions; ++a) {
        if (next_width == 0) {
            out.push_back({a, {}});
            continue;
        }
        std::vector<int> next(observations, 0);
        for (;;) {
            out.push_back({a, next});
            int d = observations - 1;
            while (d >= 0 && ++next[d] == next_width) next[d--] = 0;
            if (d < 0) break;
        }
    }
    return out;
}

bool non_decreasing(const std::vector<double>& trace) {
    return std::is_sorted(trace.begin(), trace.end());
}

}  // namespace

TEST_CASE("configuration checks") {
    SolverConfig c;
    CHECK_NOTHROW(check_config(c));
    c.max_passes = 0;
    CHECK_THROWS_AS(check_config(c), std::invalid_argument);
    c = {};
    c.restarts = 0;
    CHECK_THROWS_AS(check_config(c), std::invalid_argument);
    c = {};
    c.width = 0;
    CHECK_THROWS_AS(check_config(c), std::invalid_argument);
    CHECK(parse_mode("exact") == Mode::Exact);
    CHECK(parse_mode("lb") == Mode::LowerBound);
    CHECK_FALSE(parse_mode("fast"));
}

TEST_CASE("forward_pass") {
    SUBCASE("horizon one keeps the initial belief") {
        const Model model(sensing_toy(1));
        const JointPolicy policy{{layered({{{1, {}}}})}};
        const auto stats = forward_pass(model, policy);
        CHECK(stats.expected_belief(0, 0) == model.problem().initial_belief);
    }

    SUBCASE("expected beliefs match history enumeration") {
        std::mt19937_64 rng(5);
        for (int k = 0; k < 10; ++k) {
            const Problem p = random_problem(rng);
            const Model model(p);
            const JointPolicy policy = random_policy(rng, p, 2);
            const auto stats = forward_pass(model, policy);
            std::vector<oracle::Dist> sum(stats.layer(1).nodes.size(), oracle::Dist(p.states, 0.0));
            std::vector<double> mass(sum.size(), 0.0);
            for (const auto& h : oracle::histories(p, policy, 1)) {
                const int q = stats.layer(1).nodes.encode(h.nodes);
                mass[q] += h.prob;
                for (int s = 0; s < p.states; ++s) sum[q][s] += h.prob * h.belief[s];
            }
            for (std::size_t q = 0; q < sum.size(); ++q) {
                if (mass[q] <= 0.0) continue;
                for (int s = 0; s < p.states; ++s) {
                    CHECK(stats.expected_belief(1, static_cast<int>(q))[s] ==
                          doctest::Approx(sum[q][s] / mass[q]).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("optimize_last_step") {
    SUBCASE("constant rewards pick the larger one") {
        Problem p = sensing_toy(1);
        p.step_rewards[0] = LinearReward{{1.0, 1.0, 0.0, 0.0}};
        p.final_reward = {};
        const Model model(p);
        const JointPolicy policy{{layered({{{1, {}}}})}};
        const auto stats = forward_pass(model, policy);
        ValueFunction values(model, policy);
        CHECK(optimize_last_step(model, policy, stats, values, 0, 0, Mode::Exact) == 0);
    }

    SUBCASE("ties go to the lowest action index") {
        Problem p = sensing_toy(1);
        p.final_reward = {};
        const Model model(p);
        const JointPolicy policy{{layered({{{1, {}}}})}};
        const auto stats = forward_pass(model, policy);
        ValueFunction values(model, policy);
        CHECK(optimize_last_step(model, policy, stats, values, 0, 0, Mode::LowerBound) == 0);
    }

    SUBCASE("MAV: a radar whose cost exceeds its information gain is not used") {
        const Model model(build_mav({}, 1));
        const JointPolicy camera = open_loop_policy(model, {0});  // both agents on camera
        const auto stats = forward_pass(model, camera);
        ValueFunction values(model, camera);
        const double with_camera = evaluate(model, camera);
        const double with_radar = evaluate(model, open_loop_policy(model, {mav::kRadar * 2 + mav::kCamera}));
        CHECK(with_camera > with_radar);
        CHECK(optimize_last_step(model, camera, stats, values, 0, 0, Mode::Exact) == mav::kCamera);
    }

    SUBCASE("unreachable nodes cannot be scored") {
        const Model model(sensing_toy(2));
        const JointPolicy policy{{layered({{{0, {0, 0}}}, {{0, {}}, {1, {}}}})}};
        const auto stats = forward_pass(model, policy);
        ValueFunction values(model, policy);
        CHECK_THROWS_AS(optimize_last_step(model, policy, stats, values, 0, 1, Mode::Exact), UnreachableNode);
    }
}

TEST_CASE("optimize_step") {
    SUBCASE("a single successor is forced") {
        const Model model(sensing_toy(2));
        const JointPolicy policy{{layered({{{1, {0, 0}}}, {{1, {}}}})}};
        const auto stats = forward_pass(model, policy);
        ValueFunction values(model, policy);
        const auto [a, next] = optimize_step(model, policy, stats, values, 0, 0, 0, Mode::Exact);
        CHECK(a == 0);
        CHECK(next == std::vector<int>{0, 0});
    }

    SUBCASE("every observation routes to a dominant successor") {
        Problem p = sensing_toy(2);
        p.final_reward = {};
        // Action 1 costs one unit at step 1; node 1 of layer 1 uses it.
        p.step_rewards[1] = LinearReward{{0.0, 0.0, -1.0, -1.0}};
        const Model model(p);
        const JointPolicy policy{{layered({{{0, {1, 1}}}, {{1, {}}, {0, {}}}})}};
        const auto stats = forward_pass(model, policy);
        ValueFunction values(model, policy);
        const auto [a, next] = optimize_step(model, policy, stats, values, 0, 0, 0, Mode::Exact);
        CHECK(a == 0);
        CHECK(next == std::vector<int>{1, 1});
    }

    SUBCASE("decomposed choice matches exhaustive candidate search") {
        std::mt19937_64 rng(9);
        for (int trial = 0; trial < 12; ++trial) {
            testing_support::RandomSpec spec;
            spec.horizon = 3;
            const Problem p = random_problem(rng, spec);
            const Model model(p);
            Rng init(trial);
            const JointPolicy policy = init_random_policy(model, 2, init);
            const auto stats = forward_pass(model, policy);
            for (Mode mode : {Mode::Exact, Mode::LowerBound}) {
                ValueFunction values(model, policy);
                for (int t = 0; t < p.horizon; ++t) {
                    for (int i = 0; i < p.agents; ++i) {
                        for (int k = 0; k < policy.agents[i].width(t); ++k) {
                            if (stats.local_reach(t, i, k) <= 0.0) continue;
                            const int next_width = t + 1 < p.horizon ? policy.agents[i].width(t + 1) : 0;
                            double best = -std::numeric_limits<double>::infinity();
                            for (const auto& c : all_candidates(p.actions[i], p.observations[i], next_width)) {
                                best = std::max(best, reference_objective(p, policy, stats, t, i, k, mode, c));
                            }
                            PolicyNode chosen;
                            if (next_width == 0) {
                                chosen.action = optimize_last_step(model, policy, stats, values, i, k, mode);
                            } else {
                                std::tie(chosen.action, chosen.next) =
                                    optimize_step(model, policy, stats, values, t, i, k, mode);
                            }
                            const double got = reference_objective(p, policy, stats, t, i, k, mode, chosen);
                            CHECK(got == doctest::Approx(best).epsilon(1e-9));
                            const auto scores = score_node(model, policy, stats, values, t, i, k, mode);
                            CHECK(scores.candidate(chosen.action, chosen.next) == doctest::Approx(got).epsilon(1e-9));
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("the lower-bound objective never exceeds the exact one") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 15; ++trial) {
        testing_support::RandomSpec spec;
        spec.horizon = 3;
        const Problem p = random_problem(rng, spec);
        const Model model(p);
        const JointPolicy policy = random_policy(rng, p, 2);
        const auto stats = forward_pass(model, policy);
        ValueFunction values(model, policy);
        for (int t = 0; t < p.horizon; ++t) {
            for (int i = 0; i < p.agents; ++i) {
                for (int k = 0; k < policy.agents[i].width(t); ++k) {
                    if (stats.local_reach(t, i, k) <= 0.0) continue;
                    const auto exact = score_node(model, policy, stats, values, t, i, k, Mode::Exact);
                    const auto bound = score_node(model, policy, stats, values, t, i, k, Mode::LowerBound);
                    for (const auto& c : all_candidates(exact.actions, exact.observations, exact.next_width)) {
                        CHECK(bound.candidate(c.action, c.next) <= exact.candidate(c.action, c.next) + 1e-9);
                    }
                }
            }
        }
    }
}

TEST_CASE("backward_pass") {
    SUBCASE("an optimal policy keeps its value") {
        const Model model(sensing_toy(2));
        const JointPolicy policy{{layered({{{0, {0, 0}}}, {{0, {}}}})}};
        CHECK(evaluate(model, policy) == doctest::Approx(0.0));
        Rng rng(1);
        const auto plus = backward_pass(model, policy, forward_pass(model, policy), Mode::Exact, rng);
        CHECK(evaluate(model, plus) == doctest::Approx(0.0));
    }

    SUBCASE("identical nodes are merged and the copy is randomized") {
        const Model model(sensing_toy(3));
        const JointPolicy policy{{layered({{{0, {0, 1}}}, {{1, {0, 1}}, {1, {1, 0}}}, {{0, {}}, {1, {}}}})}};
        Rng rng(2);
        std::vector<BackwardEvent> log;
        const auto plus = backward_pass(model, policy, forward_pass(model, policy), Mode::Exact, rng, &log);
        const auto redirected = std::find_if(log.begin(), log.end(), [](const BackwardEvent& e) {
            return e.kind == BackwardEvent::Kind::Redirected && e.t == 1 && e.node == 1 && e.target == 0;
        });
        CHECK(redirected != log.end());
        CHECK_FALSE(plus.agents[0].node(1, 1) == plus.agents[0].node(1, 0));
        for (int t = 0; t < 3; ++t) {
            for (int k = 0; k < plus.agents[0].width(t); ++k) CHECK_FALSE(find_duplicate(plus.agents[0], t, k));
        }
    }

    SUBCASE("unreachable nodes are randomized") {
        const Model model(sensing_toy(3));
        const JointPolicy policy{{layered({{{1, {0, 0}}}, {{1, {0, 0}}, {0, {1, 1}}}, {{0, {}}, {1, {}}}})}};
        Rng rng(3);
        std::vector<BackwardEvent> log;
        backward_pass(model, policy, forward_pass(model, policy), Mode::Exact, rng, &log);
        int randomized = 0;
        for (const auto& e : log) {
            if (e.kind == BackwardEvent::Kind::RandomizedUnreachable) {
                ++randomized;
                CHECK(e.node == 1);
            }
        }
        CHECK(randomized == 2);
    }

    SUBCASE("linear rewards make both modes choose identically") {
        std::mt19937_64 rng(12);
        testing_support::RandomSpec spec;
        spec.rewards = testing_support::RewardMix::Linear;
        spec.horizon = 3;
        for (int trial = 0; trial < 15; ++trial) {
            const Problem p = random_problem(rng, spec);
            const Model model(p);
            Rng init(trial);
            const JointPolicy policy = init_random_policy(model, 2, init);
            const auto stats = forward_pass(model, policy);
            Rng r1(trial), r2(trial);
            CHECK(backward_pass(model, policy, stats, Mode::Exact, r1) ==
                  backward_pass(model, policy, stats, Mode::LowerBound, r2));
        }
    }

    SUBCASE("no two nodes of a layer coincide afterwards") {
        std::mt19937_64 rng(13);
        testing_support::RandomSpec spec;
        spec.horizon = 4;
        spec.actions = 3;
        for (int trial = 0; trial < 15; ++trial) {
            const Problem p = random_problem(rng, spec);
            const Model model(p);
            Rng r(trial);
            const JointPolicy policy = random_policy(rng, p, 3);
            const auto plus = backward_pass(model, policy, forward_pass(model, policy), Mode::LowerBound, r);
            for (const auto& local : plus.agents) {
                for (int t = 0; t < local.horizon(); ++t) {
                    for (int k = 0; k < local.width(t); ++k) CHECK_FALSE(find_duplicate(local, t, k));
                }
            }
        }
    }
}

TEST_CASE("solve") {
    SUBCASE("single agent, one step, two states") {
        Problem p = sensing_toy(1);
        p.step_rewards[0] = LinearReward{{0.3, -0.1, -0.2, 0.05}};
        const Model model(p);
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < 2; ++a) best = std::max(best, oracle::value(p, open_loop_policy(model, {a})));
        SolverConfig config;
        config.restarts = 3;
        const auto report = solve(model, config);
        CHECK(report.best_value == doctest::Approx(best).epsilon(1e-12));
    }

    SUBCASE("MAV with two steps reaches the optimum") {
        const Model model(build_mav({}, 2));
        SolverConfig config;
        config.restarts = 100;
        config.width = 2;
        const auto report = solve(model, config);
        CHECK(report.best_value == doctest::Approx(oracle::optimal_value(model.problem())).epsilon(1e-6));
        for (const auto& r : report.restarts) CHECK(non_decreasing(r.value_trace));
    }

    SUBCASE("traces are non-decreasing and the best restart is reported") {
        std::mt19937_64 rng(14);
        testing_support::RandomSpec spec;
        spec.horizon = 4;
        const Problem p = random_problem(rng, spec);
        const Model model(p);
        SolverConfig config;
        config.restarts = 8;
        config.width = 3;
        config.mode = Mode::Exact;
        const auto report = solve(model, config);
        CHECK(report.restarts.size() == 8);
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& r : report.restarts) {
            CHECK(non_decreasing(r.value_trace));
            CHECK(r.value == r.value_trace.back());
            CHECK(r.value == doctest::Approx(evaluate(model, r.policy)).epsilon(1e-12));
            CHECK(r.value_trace.size() == r.pass_seconds.size() + 1);
            best = std::max(best, r.value);
        }
        CHECK(report.best_value == best);
        CHECK(evaluate(model, report.best_policy) == report.best_value);
    }

    SUBCASE("results depend only on the seed") {
        const Model model(build_rovers(2));
        SolverConfig config;
        config.restarts = 4;
        config.seed = 77;
        const auto a = solve(model, config);
        config.jobs = 2;
        const auto b = solve(model, config);
        REQUIRE(a.restarts.size() == b.restarts.size());
        for (std::size_t r = 0; r < a.restarts.size(); ++r) {
            CHECK(a.restarts[r].policy == b.restarts[r].policy);
            CHECK(a.restarts[r].value_trace == b.restarts[r].value_trace);
        }
        config.jobs = 1;
        config.restarts = 6;
        const auto c = solve(model, config);
        for (std::size_t r = 0; r < a.restarts.size(); ++r) CHECK(c.restarts[r].policy == a.restarts[r].policy);
        CHECK(restart_seed(77, 0) != restart_seed(77, 1));
        CHECK(restart_seed(77, 0) != restart_seed(78, 0));
    }

    SUBCASE("a zero time limit stops before the first pass") {
        const Model model(build_rovers(2));
        SolverConfig config;
        config.restarts = 5;
        config.time_limit = std::chrono::seconds(0);
        const auto report = solve(model, config);
        CHECK(report.time_limit_exceeded);
        REQUIRE(report.restarts.size() == 1);
        CHECK(report.restarts[0].value_trace.size() == 1);
        CHECK(report.best_value == report.restarts[0].value);
    }

    SUBCASE("a pass that changes nothing ends the restart") {
        const Model model(sensing_toy(3));
        SolverConfig config;
        config.restarts = 5;
        config.width = 1;
        const auto report = solve(model, config);
        for (const auto& r : report.restarts) {
            CHECK(r.converged);
            CHECK(r.pass_seconds.size() < static_cast<std::size_t>(config.max_passes));
            const auto n = r.value_trace.size();
            CHECK(r.value_trace[n - 1] == r.value_trace[n - 2]);
        }
        CHECK(report.best_value == doctest::Approx(0.0));
    }
}
