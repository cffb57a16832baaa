#pragma once

#include <vector>

#include "maneuver/gridmap.hpp"
#include "maneuver/loss.hpp"
#include "maneuver/spline.hpp"

namespace maneuver {

// A quintic segment template with start curvature 0, expanded from any node
// pose. ddy = 0 keeps terminal curvature at 0, so templates chain exactly.
struct MotionPrimitive {
    SegmentSpec spec;
    Pose2 end_offset;  // endpoint pose in the node's local frame
    double end_curvature = 0.0;
    double length = 0.0;  // arc length by discretization
    double max_abs_kappa = 0.0;
};

// 73 primitives: one 2 m straight plus 18 mirrored pairs per length {2, 4} m
// (turn, lane-change, and combined families), each calibrated so the peak
// |curvature| stays within the vehicle's limit.
std::vector<MotionPrimitive> generate_primitives(const VehicleParams& params);

struct PlanResult {
    enum class Status { kSuccess, kNoPath };
    Status status = Status::kNoPath;
    std::vector<SegmentSpec> specs;  // chainable from q0
    std::vector<Vec2> polyline;      // dense global samples of the found path
    double length = 0.0;
    int expansions = 0;

    bool success() const { return status == Status::kSuccess; }
};

struct PlanOptions {
    int budget = 50000;        // node-expansion (pop) limit
    double snap_radius = 8.0;  // max Dubins distance for the analytic goal join
};

// Best-first search over primitive expansions, f = g + Dubins distance to the
// goal pose. A popped node first tries the analytic goal join (one quintic to
// the exact goal pose, curvature- and collision-checked); a node already
// within 0.2 m Dubins distance succeeds outright.
PlanResult plan(const OccupancyGrid& grid, const VehicleParams& params,
                const Configuration& q0, const GoalRegion& goal,
                const PlanOptions& options = {});

}  // namespace maneuver
