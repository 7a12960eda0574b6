#include <doctest.h>

#include <cmath>
#include <random>

#include "npgi/belief.hpp"
#include "npgi/domains.hpp"
#include "npgi/errors.hpp"
#include "support/oracle.hpp"
#include "support/random_problem.hpp"

using namespace npgi;
using testing_support::random_distribution;
using testing_support::random_problem;

namespace {

// Two agents, three states, identity dynamics, four equally likely joint
// observations regardless of the state.
Problem uninformative() {
    Problem p;
    p.agents = 2;
    p.states = 3;
    p.actions = {1, 1};
    p.observations = {2, 2};
    p.horizon = 2;
    p.allocate();
    p.initial_belief = {0.5, 0.3, 0.2};
    for (int s = 0; s < 3; ++s) {
        p.transition_at(0, s, s) = 1.0;
        for (int z = 0; z < 4; ++z) p.observation_at(0, s, z) = 0.25;
    }
    return p;
}

}  // namespace

TEST_CASE("bayes_update") {
    SUBCASE("identity dynamics with an uninformative sensor keep the belief") {
        const Model model(uninformative());
        const Belief b{0.1, 0.6, 0.3};
        for (int z = 0; z < 4; ++z) {
            const auto [post, eta] = bayes_update(model, b, 0, z);
            CHECK(eta == doctest::Approx(0.25));
            for (int s = 0; s < 3; ++s) CHECK(post[s] == doctest::Approx(b[s]));
        }
    }

    SUBCASE("lone rover measurement at a uniform site") {
        const Model model(build_rovers(2));
        const int a = rovers::kMeasure * 5 + rovers::kSouth;
        const int z = rovers::observation(0, 1) * 8 + rovers::observation(3, 0);
        const auto [post, eta] = bayes_update(model, model.problem().initial_belief, a, z);
        CHECK(eta == doctest::Approx(0.5));
        double site0 = 0.0;
        for (int s = 0; s < 256; ++s) {
            if (s % 16 & 1) site0 += post[s];
        }
        CHECK(site0 == doctest::Approx(0.8));
    }

    SUBCASE("an impossible observation throws") {
        Problem p = uninformative();
        for (int s = 0; s < 3; ++s) {
            p.observation_at(0, s, 0) = 0.5;
            p.observation_at(0, s, 3) = 0.0;
        }
        const Model model(p);
        CHECK_THROWS_AS(bayes_update(model, p.initial_belief, 0, 3), ZeroProbabilityObservation);
    }

    SUBCASE("agrees with the dense reference on random problems") {
        std::mt19937_64 rng(1);
        for (int k = 0; k < 30; ++k) {
            const Problem p = random_problem(rng);
            const Model model(p);
            const Belief b = random_distribution(rng, p.states, 0.3);
            for (int a = 0; a < p.joint_actions(); ++a) {
                for (int z = 0; z < p.joint_observations(); ++z) {
                    double eta = 0.0;
                    const auto expected = oracle::posterior(p, b, a, z, eta);
                    if (eta <= kZeroProb) continue;
                    const auto [post, prior] = bayes_update(model, b, a, z);
                    CHECK(prior == doctest::Approx(eta).epsilon(1e-12));
                    for (int s = 0; s < p.states; ++s) CHECK(post[s] == doctest::Approx(expected[s]).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("successors enumerate every possible observation") {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 30; ++k) {
        const Problem p = random_problem(rng);
        const Model model(p);
        const Belief b = random_distribution(rng, p.states, 0.3);
        for (int a = 0; a < p.joint_actions(); ++a) {
            const auto branches = successors(model, b, a);
            const Belief predicted = predict(model, b, a);
            Belief mixed(p.states, 0.0);
            double total = 0.0;
            int last = -1;
            for (const auto& br : branches) {
                CHECK(br.observation > last);
                last = br.observation;
                total += br.prob;
                for (int s = 0; s < p.states; ++s) mixed[s] += br.prob * br.posterior[s];
                const auto [post, eta] = bayes_update(model, b, a, br.observation);
                CHECK(eta == br.prob);
                CHECK(post == br.posterior);
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
            for (int s = 0; s < p.states; ++s) CHECK(mixed[s] == doctest::Approx(predicted[s]).epsilon(1e-9));
        }
    }
}

TEST_CASE("the Bayes filter is linear in the belief before normalization") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 30; ++k) {
        const Problem p = random_problem(rng);
        const Model model(p);
        const Belief b1 = random_distribution(rng, p.states);
        const Belief b2 = random_distribution(rng, p.states);
        const double lambda = unit(rng);
        Belief mix(p.states);
        for (int s = 0; s < p.states; ++s) mix[s] = lambda * b1[s] + (1 - lambda) * b2[s];
        for (int a = 0; a < p.joint_actions(); ++a) {
            for (int z = 0; z < p.joint_observations(); ++z) {
                const auto run = [&](const Belief& b) -> std::pair<Belief, double> {
                    double eta = 0.0;
                    for (const auto& br : successors(model, b, a)) {
                        if (br.observation == z) return {br.posterior, br.prob};
                    }
                    return {Belief(p.states, 0.0), eta};
                };
                const auto [post1, eta1] = run(b1);
                const auto [post2, eta2] = run(b2);
                const auto [postm, etam] = run(mix);
                if (eta1 == 0.0 || eta2 == 0.0) continue;
                for (int s = 0; s < p.states; ++s) {
                    CHECK(etam * postm[s] ==
                          doctest::Approx(lambda * eta1 * post1[s] + (1 - lambda) * eta2 * post2[s]).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("history_belief") {
    const Model model(uninformative());
    const auto& b0 = model.problem().initial_belief;

    SUBCASE("empty history") {
        const auto hb = history_belief(model, {});
        REQUIRE(hb.belief);
        CHECK(*hb.belief == b0);
        CHECK(hb.prob == 1.0);
    }

    SUBCASE("one step") {
        const auto hb = history_belief(model, {{0}, {2}});
        REQUIRE(hb.belief);
        CHECK(hb.prob == doctest::Approx(0.25));
        for (int s = 0; s < 3; ++s) CHECK((*hb.belief)[s] == doctest::Approx(b0[s]));
    }

    SUBCASE("zero-likelihood observation") {
        Problem p = uninformative();
        for (int s = 0; s < 3; ++s) {
            p.observation_at(0, s, 0) = 0.5;
            p.observation_at(0, s, 3) = 0.0;
        }
        const Model blocked(p);
        const auto hb = history_belief(blocked, {{0, 0}, {3, 1}});
        CHECK(hb.prob == 0.0);
        CHECK_FALSE(hb.belief);
    }

    SUBCASE("history probabilities sum to one for fixed actions") {
        std::mt19937_64 rng(4);
        for (int k = 0; k < 10; ++k) {
            testing_support::RandomSpec spec;
            spec.horizon = 3;
            const Problem p = random_problem(rng, spec);
            const Model m(p);
            std::uniform_int_distribution<int> action(0, p.joint_actions() - 1);
            const std::vector<int> actions{action(rng), action(rng), action(rng)};
            double total = 0.0;
            for (const auto& h : oracle::observation_sequences(p, actions)) {
                const auto hb = history_belief(m, {h.actions, h.observations});
                CHECK(hb.prob == doctest::Approx(h.prob).epsilon(1e-12));
                total += hb.prob;
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("neg_entropy") {
    CHECK(neg_entropy(Belief(8, 0.125)) == doctest::Approx(-3.0));
    CHECK(neg_entropy({0.0, 1.0, 0.0}) == 0.0);
    CHECK(neg_entropy({0.8, 0.2}) == doctest::Approx(-0.7219280948873623).epsilon(1e-15));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        const int n = 2 + k % 7;
        const Belief b1 = random_distribution(rng, n, 0.3);
        const Belief b2 = random_distribution(rng, n, 0.3);
        const double lambda = unit(rng);
        Belief mix(n);
        for (int s = 0; s < n; ++s) mix[s] = lambda * b1[s] + (1 - lambda) * b2[s];
        CHECK(neg_entropy(mix) <= lambda * neg_entropy(b1) + (1 - lambda) * neg_entropy(b2) + 1e-12);
        CHECK(neg_entropy(b1) >= -std::log2(n) - 1e-12);
        CHECK(neg_entropy(b1) <= 0.0);
    }
}

TEST_CASE("rewards") {
    SUBCASE("rover measurement costs") {
        const Model model(build_rovers(2));
        const int both = rovers::kMeasure * 5 + rovers::kMeasure;
        CHECK(reward(model, 0, model.problem().initial_belief, both) == doctest::Approx(-0.2));
        CHECK(reward(model, 1, Belief(256, 1.0 / 256), both) == doctest::Approx(-0.2));
        CHECK(reward(model, 0, model.problem().initial_belief, rovers::kMeasure * 5) == doctest::Approx(-0.1));
        CHECK(final_reward(model, model.problem().initial_belief) == doctest::Approx(-4.0));
    }

    SUBCASE("zero specification") {
        const Model model(uninformative());
        CHECK(reward(model, 0, {0.2, 0.3, 0.5}, 0) == 0.0);
        CHECK(final_reward(model, {0.2, 0.3, 0.5}) == 0.0);
    }

    SUBCASE("constant linear reward") {
        Problem p = uninformative();
        p.step_rewards[1] = LinearReward{std::vector<double>(3, 1.0)};
        const Model model(p);
        CHECK(reward(model, 1, {0.2, 0.3, 0.5}, 0) == doctest::Approx(1.0));
    }

    SUBCASE("agrees with the dense reference") {
        std::mt19937_64 rng(6);
        for (int k = 0; k < 30; ++k) {
            const Problem p = random_problem(rng);
            const Model model(p);
            const Belief b = random_distribution(rng, p.states, 0.3);
            for (int t = 0; t < p.horizon; ++t) {
                for (int a = 0; a < p.joint_actions(); ++a) {
                    CHECK(reward(model, t, b, a) == doctest::Approx(oracle::step_reward(p, t, b, a)).epsilon(1e-12));
                }
            }
            CHECK(final_reward(model, b) == doctest::Approx(oracle::terminal_reward(p, b)).epsilon(1e-12));
        }
    }
}
