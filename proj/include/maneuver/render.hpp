#pragma once

// PNG rendering: planned paths over the occupancy grid and reachable-set
// heatmaps (fraction of feasible goal headings per cell).

#include <string>
#include <vector>

#include "maneuver/gridmap.hpp"
#include "maneuver/policy.hpp"

namespace maneuver {

inline constexpr int kRenderScale = 4;  // output pixels per grid cell side

// Grid upscaled kRenderScale x (obstacles black, free white) with one colored
// trail per characteristic point: guiding point and the four body corners.
void render_path_png(const std::string& path, const OccupancyGrid& grid,
                     const DiscretizedPath& d, const VehicleParams& params);

struct ReachableOptions {
    double grid_step = 1.0;  // goal spacing in meters
    int headings = 8;        // evenly spaced in (-pi/2, pi/2)
    int n_segments = 6;
};

struct ReachableResult {
    std::vector<Vec2> goals;       // sampled goal positions (free cells only)
    std::vector<double> fraction;  // feasible-heading fraction per goal
    int rollouts = 0;
    int feasible = 0;
};

// Rolls the policy out to every goal cell x heading and scores feasibility
// with the path loss. The map branch is evaluated once.
ReachableResult compute_reachable(const PolicyNet& net, const OccupancyGrid& grid,
                                  const VehicleParams& params, const Configuration& q0,
                                  const ReachableOptions& options = {});

// Obstacles black, free space white, goals drawn as blue dots whose darkness
// is proportional to the feasible-heading fraction.
void render_reachable_png(const std::string& path, const OccupancyGrid& grid,
                          const ReachableResult& r);

}  // namespace maneuver
