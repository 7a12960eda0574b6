#pragma once

#include <array>

#include "npgi/problem.hpp"

namespace npgi {

/// Two MAVs tracking a target on four line-arranged locations. The numeric
/// defaults are illustrative; only the structure of the domain is fixed.
struct MavParams {
    double stay_prob_friendly = 0.7;
    double stay_prob_hostile = 0.3;
    std::array<double, 4> camera_accuracy{0.9, 0.7, 0.4, 0.3};  // by distance 0..3
    std::array<double, 4> radar_accuracy{0.4, 0.6, 0.8, 0.9};
    /// With both radars on, radar accuracy is scaled by (1 - penalty).
    double interference_penalty = 0.5;
};

/// Throws std::invalid_argument when a parameter is outside [0, 1].
void check_mav_params(const MavParams& params);

namespace mav {
inline constexpr int kCamera = 0;
inline constexpr int kRadar = 1;
inline constexpr int kLocations = 4;
inline constexpr int state(int hostile, int location) { return hostile * kLocations + location; }
inline constexpr int distance(int agent, int location) { return agent == 0 ? location : kLocations - 1 - location; }
}  // namespace mav

Problem build_mav(const MavParams& params = {}, int horizon = 2);

/// Two rovers on a 2x2 grid measuring four static binary sites.
///
/// Grid: l0 NW, l1 SW, l2 NE, l3 SE; site j sits at l_j. State index is
/// (loc1 * 4 + loc2) * 16 + site bits, observation z_i = loc_i * 2 + bit.
namespace rovers {
inline constexpr int kNorth = 0;
inline constexpr int kSouth = 1;
inline constexpr int kEast = 2;
inline constexpr int kWest = 3;
inline constexpr int kMeasure = 4;
inline constexpr int kSites = 4;
inline constexpr int state(int loc1, int loc2, int sites) { return (loc1 * 4 + loc2) * 16 + sites; }
inline constexpr int observation(int location, int bit) { return location * 2 + bit; }
/// Location reached by a successful move; off-grid moves stay put.
int move(int location, int action);
}  // namespace rovers

Problem build_rovers(int horizon = 2);

}  // namespace npgi
