#include "npgi/rollout.hpp"

#include <cmath>
#include <span>

namespace npgi {

namespace {

template <typename Entries>
int draw(const Entries& entries, double u) {
    double acc = 0.0;
    for (const auto& e : entries) {
        acc += e.prob;
        if (u < acc) return e.index;
    }
    return entries.back().index;  // rounding slack at the top of the cumulative sum
}

}  // namespace

RolloutEstimate simulate(const Model& model, const JointPolicy& policy, std::size_t episodes, Rng& rng) {
    check_policy(model, policy);
    const auto& p = model.problem();
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    std::vector<Model::Entry> start;
    for (int s = 0; s < p.states; ++s) {
        if (p.initial_belief[s] > 0.0) start.push_back({s, p.initial_belief[s]});
    }

    std::vector<JointSpace> layers;
    for (int t = 0; t < p.horizon; ++t) layers.push_back(policy.layer_space(t));

    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t e = 0; e < episodes; ++e) {
        int state = draw(start, uniform(rng));
        Belief b = p.initial_belief;
        int q = 0;
        double total = 0.0;
        for (int t = 0; t < p.horizon; ++t) {
            const int a = policy.joint_action(model.action_space(), layers[t], t, q);
            total += reward(model, t, b, a);
            state = draw(model.transitions(a, state), uniform(rng));
            const int z = draw(model.observations(a, state), uniform(rng));
            b = bayes_update(model, b, a, z).first;
            if (t + 1 < p.horizon) q = policy.joint_next(model.observation_space(), layers[t], layers[t + 1], t, q, z);
        }
        total += final_reward(model, b);
        sum += total;
        sum_sq += total * total;
    }

    RolloutEstimate est;
    est.episodes = episodes;
    if (episodes == 0) return est;
    const double n = static_cast<double>(episodes);
    est.mean = sum / n;
    const double var = episodes > 1 ? std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0)) : 0.0;
    est.std_error = std::sqrt(var / n);
    return est;
}

}  // namespace npgi
