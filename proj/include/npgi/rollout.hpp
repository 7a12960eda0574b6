#pragma once

#include <cstddef>

#include "npgi/policy.hpp"

namespace npgi {

struct RolloutEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t episodes = 0;
};

/// Monte-Carlo estimate of a policy's value. Each episode samples a state
/// trajectory and observations from the model, tracks the joint belief with
/// the Bayes filter, and sums the belief-dependent rewards along the way.
RolloutEstimate simulate(const Model& model, const JointPolicy& policy, std::size_t episodes, Rng& rng);

}  // namespace npgi
