#pragma once

// Policy evaluation: single-step forward, the autoregressive rollout (map and
// goal fixed per episode, configuration advanced to each segment endpoint),
// and the reverse-mode gradient of total loss through rollout.

#include <array>
#include <span>
#include <vector>

#include "maneuver/autodiff.hpp"
#include "maneuver/loss.hpp"
#include "maneuver/net.hpp"
#include "maneuver/spline.hpp"

namespace maneuver {

struct PolicyInput {
    const OccupancyGrid* grid = nullptr;
    std::array<double, 5> current{};  // x, y, sin(theta), cos(theta), beta
    std::array<double, 4> goal{};     // xk, yk, sin(theta_k), cos(theta_k)
};

PolicyInput make_policy_input(const OccupancyGrid& grid, const Configuration& current,
                              const GoalRegion& goal);

// Reusable buffers; one per worker thread.
struct PolicyWorkspace {
    MapActivations map;
    std::vector<StepActivations> steps;
    ad::Tape tape;
    std::vector<double> d_latent;
};

SegmentSpec policy_forward(const PolicyNet& net, const PolicyInput& input,
                           PolicyWorkspace* ws = nullptr);

struct RolloutResult {
    std::vector<SegmentSpec> specs;
    PathSpline path;
};

// N forward calls; after each, the configuration moves to the segment
// endpoint (beta = atan(kappa_end * wheelbase)). The map latent is computed
// once per episode.
RolloutResult rollout(const PolicyNet& net, const OccupancyGrid& grid,
                      const VehicleParams& params, const Configuration& q0,
                      const GoalRegion& goal, int n_segments,
                      PolicyWorkspace* ws = nullptr);

// Same rollout reusing an already computed map branch (many goals, one map).
RolloutResult rollout(const PolicyNet& net, const MapActivations& map,
                      const VehicleParams& params, const Configuration& q0,
                      const GoalRegion& goal, int n_segments,
                      PolicyWorkspace* ws = nullptr);

struct GradientResult {
    std::vector<double> param_grads;  // sized net.param_count()
    LossBreakdown loss;
};

// d(total_loss(rollout))/d(params) by reverse mode: the geometric pipeline
// runs on the tape, network layers backpropagate through fixed-graph code, and
// tape hooks splice the two at each step's segment parameters.
// Throws NonFiniteGradient if any component is not finite.
GradientResult policy_gradient(const PolicyNet& net, const OccupancyGrid& grid,
                               const VehicleParams& params, const Configuration& q0,
                               const GoalRegion& goal, std::span<const Vec2> ref_path,
                               int n_segments, const LossOptions& options = {},
                               PolicyWorkspace* ws = nullptr);

}  // namespace maneuver
