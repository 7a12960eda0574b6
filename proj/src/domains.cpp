#include "npgi/domains.hpp"

#include <stdexcept>
#include <string>

namespace npgi {

namespace {

void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

// Probability that a symmetric 4-way sensor with the given accuracy reports
// `reported` when the target is at `actual`.
double sensor(double accuracy, int actual, int reported) {
    return actual == reported ? accuracy : (1.0 - accuracy) / (mav::kLocations - 1);
}

}  // namespace

void check_mav_params(const MavParams& params) {
    check_probability(params.stay_prob_friendly, "stay_prob_friendly");
    check_probability(params.stay_prob_hostile, "stay_prob_hostile");
    for (double p : params.camera_accuracy) check_probability(p, "camera_accuracy");
    for (double p : params.radar_accuracy) check_probability(p, "radar_accuracy");
    check_probability(params.interference_penalty, "interference_penalty");
}

Problem build_mav(const MavParams& params, int horizon) {
    check_mav_params(params);
    using namespace mav;

    Problem p;
    p.agents = 2;
    p.states = 2 * kLocations;
    p.actions = {2, 2};
    p.observations = {kLocations, kLocations};
    p.horizon = horizon;
    p.allocate();
    p.initial_belief.assign(p.states, 1.0 / p.states);

    const auto actions = p.action_space();
    const auto observations = p.observation_space();

    for (int a = 0; a < p.joint_actions(); ++a) {
        for (int hostile = 0; hostile < 2; ++hostile) {
            const double stay = hostile ? params.stay_prob_hostile : params.stay_prob_friendly;
            for (int loc = 0; loc < kLocations; ++loc) {
                const bool left = loc > 0;
                const bool right = loc + 1 < kLocations;
                const double moved = (1.0 - stay) / (static_cast<int>(left) + static_cast<int>(right));
                const int s = state(hostile, loc);
                p.transition_at(a, s, s) = stay;
                if (left) p.transition_at(a, s, state(hostile, loc - 1)) = moved;
                if (right) p.transition_at(a, s, state(hostile, loc + 1)) = moved;
            }
        }
    }

    for (int a = 0; a < p.joint_actions(); ++a) {
        const bool interference = actions.component(a, 0) == kRadar && actions.component(a, 1) == kRadar;
        for (int s = 0; s < p.states; ++s) {
            const int loc = s % kLocations;
            for (int z = 0; z < p.joint_observations(); ++z) {
                double prob = 1.0;
                for (int i = 0; i < 2; ++i) {
                    const int d = distance(i, loc);
                    double accuracy = actions.component(a, i) == kCamera ? params.camera_accuracy[d]
                                                                          : params.radar_accuracy[d];
                    if (interference) accuracy *= 1.0 - params.interference_penalty;
                    prob *= sensor(accuracy, loc, observations.component(z, i));
                }
                p.observation_at(a, s, z) = prob;
            }
        }
    }

    LinearReward costs;
    costs.table.assign(static_cast<std::size_t>(p.joint_actions()) * p.states, 0.0);
    for (int a = 0; a < p.joint_actions(); ++a) {
        for (int s = 0; s < p.states; ++s) {
            double r = 0.0;
            for (int i = 0; i < 2; ++i) {
                if (actions.component(a, i) != kRadar) continue;
                const int d = distance(i, s % kLocations);
                r -= 0.1 + (d == 0 ? 1.0 : d == 1 ? 0.1 : 0.0);
            }
            costs.table[static_cast<std::size_t>(a) * p.states + s] = r;
        }
    }
    p.step_rewards.assign(horizon, costs);
    p.final_reward.kind = FinalReward::Kind::NegEntropy;

    for (int s = 0; s < p.states; ++s) {
        p.labels.states.push_back((s / kLocations ? "hostile-l" : "friendly-l") + std::to_string(s % kLocations));
    }
    p.labels.actions.assign(2, {"camera", "radar"});
    p.labels.observations.assign(2, {"l0", "l1", "l2", "l3"});
    return p;
}

int rovers::move(int location, int action) {
    int col = location / 2;
    int row = location % 2;
    switch (action) {
        case kNorth: row = 0; break;
        case kSouth: row = 1; break;
        case kEast: col = 1; break;
        case kWest: col = 0; break;
        default: break;
    }
    return col * 2 + row;
}

Problem build_rovers(int horizon) {
    using namespace rovers;
    constexpr double kMoveSuccess = 0.8;
    constexpr double kLoneError = 0.2;
    constexpr double kJointFalsePositive = 0.05;
    constexpr double kJointFalseNegative = 0.01;
    constexpr double kMeasureCost = 0.1;

    Problem p;
    p.agents = 2;
    p.states = 256;
    p.actions = {5, 5};
    p.observations = {8, 8};
    p.horizon = horizon;
    p.allocate();
    p.initial_belief.assign(p.states, 0.0);
    for (int sites = 0; sites < 16; ++sites) p.initial_belief[state(0, 3, sites)] = 1.0 / 16;

    const auto actions = p.action_space();

    for (int a = 0; a < p.joint_actions(); ++a) {
        const int a1 = actions.component(a, 0);
        const int a2 = actions.component(a, 1);
        for (int l1 = 0; l1 < 4; ++l1) {
            for (int l2 = 0; l2 < 4; ++l2) {
                // Per-agent outcome distributions; a move that leaves the grid is a no-op.
                const int m1 = move(l1, a1);
                const int m2 = move(l2, a2);
                const double p1 = m1 == l1 ? 1.0 : kMoveSuccess;
                const double p2 = m2 == l2 ? 1.0 : kMoveSuccess;
                for (int sites = 0; sites < 16; ++sites) {
                    const int s = state(l1, l2, sites);
                    p.transition_at(a, s, state(m1, m2, sites)) += p1 * p2;
                    if (m1 != l1) p.transition_at(a, s, state(l1, m2, sites)) += (1 - p1) * p2;
                    if (m2 != l2) p.transition_at(a, s, state(m1, l2, sites)) += p1 * (1 - p2);
                    if (m1 != l1 && m2 != l2) p.transition_at(a, s, state(l1, l2, sites)) += (1 - p1) * (1 - p2);
                }
            }
        }
    }

    for (int a = 0; a < p.joint_actions(); ++a) {
        const bool measure1 = actions.component(a, 0) == kMeasure;
        const bool measure2 = actions.component(a, 1) == kMeasure;
        for (int next = 0; next < p.states; ++next) {
            const int sites = next % 16;
            const int l1 = next / 64;
            const int l2 = (next / 16) % 4;
            const auto joint = [&](int b1, int b2) { return observation(l1, b1) * 8 + observation(l2, b2); };
            const auto lone = [&](int location, int bit) {
                const int good = (sites >> location) & 1;
                return bit == good ? 1.0 - kLoneError : kLoneError;
            };
            if (measure1 && measure2 && l1 == l2) {
                const int good = (sites >> l1) & 1;
                const double positive = good ? 1.0 - kJointFalseNegative : kJointFalsePositive;
                p.observation_at(a, next, joint(1, 1)) = positive;
                p.observation_at(a, next, joint(0, 0)) = 1.0 - positive;
                continue;
            }
            for (int b1 = 0; b1 < 2; ++b1) {
                for (int b2 = 0; b2 < 2; ++b2) {
                    const double q1 = measure1 ? lone(l1, b1) : (b1 == 0 ? 1.0 : 0.0);
                    const double q2 = measure2 ? lone(l2, b2) : (b2 == 0 ? 1.0 : 0.0);
                    if (q1 * q2 > 0.0) p.observation_at(a, next, joint(b1, b2)) = q1 * q2;
                }
            }
        }
    }

    BeliefReward costs;
    costs.functional = BeliefFunctional::Zero;
    costs.cost.assign(p.joint_actions(), 0.0);
    for (int a = 0; a < p.joint_actions(); ++a) {
        costs.cost[a] = kMeasureCost * ((actions.component(a, 0) == kMeasure) + (actions.component(a, 1) == kMeasure));
    }
    p.step_rewards.assign(horizon, costs);
    p.final_reward.kind = FinalReward::Kind::NegEntropy;

    for (int s = 0; s < p.states; ++s) {
        std::string label = "r1l" + std::to_string(s / 64) + "-r2l" + std::to_string((s / 16) % 4) + "-sites";
        for (int j = 0; j < kSites; ++j) label += ((s % 16) >> j) & 1 ? '1' : '0';
        p.labels.states.push_back(std::move(label));
    }
    p.labels.actions.assign(2, {"north", "south", "east", "west", "measure"});
    std::vector<std::string> obs;
    for (int l = 0; l < 4; ++l) {
        obs.push_back("l" + std::to_string(l) + "-neg");
        obs.push_back("l" + std::to_string(l) + "-pos");
    }
    p.labels.observations.assign(2, obs);
    return p;
}

}  // namespace npgi
