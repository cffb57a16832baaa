#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "maneuver/gridmap.hpp"
#include "maneuver/spline.hpp"

namespace maneuver {

// Axis-aligned box of accepted goal configurations around (x, y, theta).
struct GoalRegion {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double pos_tol = 0.2;   // per axis, meters
    double ang_tol = 0.05;  // radians
};

struct LossOptions {
    double gamma = 1e-4;        // total-curvature regularization weight
    double angle_weight = 1.0;  // radians-to-meters weight in the overshoot term
    bool tcurv_enabled = true;
};

struct LossBreakdown {
    double coll = 0.0;
    double curv = 0.0;
    double over = 0.0;
    double tcurv = 0.0;
    double total = 0.0;
    bool feasible = false;  // coll == curv == over == 0
};

// Hash of every discrete regime the loss evaluation passed through (collision
// gates, hinge activations, abs signs, nearest-reference-segment choices,
// angle-wrap branches). Two evaluations with equal hashes lie on the same
// smooth piece of the loss.
struct LossSignature {
    uint64_t hash = 1469598103934665603ull;  // FNV-1a offset basis

    void mix(uint64_t v) {
        hash ^= v;
        hash *= 1099511628211ull;
    }
};

bool goal_reached(const Configuration& endpoint, const GoalRegion& goal);

// Resamples a polyline so consecutive vertices are at most max_spacing apart.
std::vector<Vec2> densify_polyline(std::span<const Vec2> points, double max_spacing = 0.1);

double collision_loss(const DiscretizedPath& d, const OccupancyGrid& grid,
                      const VehicleParams& params, std::span<const Vec2> ref_path);

double curvature_loss(const DiscretizedPath& d, double kappa_max);

double overshoot_loss(const Configuration& endpoint, const GoalRegion& goal,
                      double angle_weight = 1.0);

double total_curvature_loss(const DiscretizedPath& d, double gamma = 1e-4);

LossBreakdown total_loss(const PathSpline& path, const OccupancyGrid& grid,
                         const VehicleParams& params, const GoalRegion& goal,
                         std::span<const Vec2> ref_path, const LossOptions& options = {},
                         LossSignature* signature = nullptr);

}  // namespace maneuver
