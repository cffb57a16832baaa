#pragma once

// Batch fan-out of rollout evaluation and loss gradients over scenarios.
// Work is split into kBatchChunks fixed index ranges: each chunk accumulates
// sequentially into its own buffer and the buffers are reduced in chunk order,
// so parallel results are bitwise identical to the serial reference. The
// serial path is kept as an independent loop for testing and benchmarking.

#include <span>
#include <vector>

#include "maneuver/policy.hpp"

namespace maneuver {

inline constexpr int kBatchChunks = 8;

enum class ExecMode { Serial, Parallel };

// One scenario viewed by the batch kernels; the grid and reference polyline
// are borrowed and must outlive the call.
struct BatchItem {
    const OccupancyGrid* grid = nullptr;
    Configuration q0;
    GoalRegion goal;
    std::span<const Vec2> ref_path;  // <= 0.1 m spacing expected
};

struct ScenarioEval {
    LossBreakdown loss;
    double length = 0.0;
    double accumulated_turn = 0.0;
    double time_ms = 0.0;  // rollout + discretization, excludes loss scoring
};

struct BatchEval {
    std::vector<ScenarioEval> items;
    int feasible_count = 0;
};

BatchEval evaluate_scenarios(const PolicyNet& net, const VehicleParams& params,
                             std::span<const BatchItem> items, int n_segments,
                             const LossOptions& options = {},
                             ExecMode mode = ExecMode::Parallel);

struct BatchGradient {
    std::vector<double> param_grads;  // mean over items
    std::vector<LossBreakdown> per_item;
    int feasible_count = 0;
};

BatchGradient batch_gradient(const PolicyNet& net, const VehicleParams& params,
                             std::span<const BatchItem> items, int n_segments,
                             const LossOptions& options = {},
                             ExecMode mode = ExecMode::Parallel);

// Component-wise mean; feasible is set only when every item is feasible.
LossBreakdown mean_breakdown(std::span<const LossBreakdown> items);

}  // namespace maneuver
