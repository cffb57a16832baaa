#pragma once

#include "maneuver/geometry.hpp"

namespace maneuver {

// Length of the shortest Dubins path (words LSL, RSR, LSR, RSL, RLR, LRL)
// from -> to with minimum turning radius rho.
double dubins_distance(const Pose2& from, const Pose2& to, double rho);

}  // namespace maneuver
