#pragma once

// Dataset generation (obstacle-augmented maps with lattice-solved reference
// plans), JSONL serialization, the gradient training loop, and split
// evaluation.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maneuver/batch.hpp"

namespace maneuver {

struct Scenario {
    std::string map;  // path relative to the dataset root, e.g. "maps/train_000.png"
    Configuration q0;
    GoalRegion goal;
    std::vector<Vec2> ref_path;        // reference plan polyline, <= 0.1 m spacing
    std::vector<SegmentSpec> segments;  // reference plan segments; may be empty
};

// Splits are disjoint at the map level: no map file is referenced from more
// than one split.
struct Dataset {
    std::string root;
    std::vector<Scenario> train;
    std::vector<Scenario> val;
    std::vector<Scenario> test;

    const std::vector<Scenario>& split(std::string_view name) const;  // DatasetError
};

struct GenerateConfig {
    std::string out_dir;
    // Optional base images dealt to splits in order (train, then val, then
    // test); when empty, blank bases are synthesized.
    std::vector<std::string> source_maps;
    int maps_train = 25;
    int maps_val = 5;
    int maps_test = 1;
    int scenarios_train = 500;
    int scenarios_val = 100;
    int scenarios_test = 100;
    int obstacle_count_max = 15;  // per map, drawn uniformly in [0, max]
    uint64_t seed = 1;
    int plan_budget = 50000;
    // Per map, goal sampling stops after attempt_factor * target attempts even
    // if the target number of solved scenarios was not reached.
    int attempt_factor = 6;
};

struct SplitStats {
    int maps = 0;
    int scenarios = 0;
    int attempted = 0;
    int skipped = 0;
    int audit_failures = 0;
    double mean_plan_ms = 0.0;
};

struct GenerateResult {
    Dataset dataset;
    SplitStats train;
    SplitStats val;
    SplitStats test;
};

// Writes out_dir/maps/*.png, out_dir/scenarios/{train,val,test}.jsonl and
// out_dir/meta.json, and returns the dataset in memory. Deterministic per
// seed: every map has an independently derived generator state.
GenerateResult generate_dataset(const GenerateConfig& cfg,
                                const VehicleParams& params = kia_rio());

// Loads a dataset directory. With validate set, every scenario that carries
// its segments is rebuilt and must still score feasible against its own map
// and reference path; ref_path spacing is also checked. Throws DatasetError.
Dataset load_dataset(const std::string& root, bool validate = true,
                     const VehicleParams& params = kia_rio());

// Grids for every distinct scenario map, loaded once and shared.
using MapSet = std::map<std::string, OccupancyGrid>;
MapSet load_maps(const Dataset& data);

// Views over scenarios for the batch kernels; maps and scenarios must outlive
// the returned items.
std::vector<BatchItem> make_batch_items(std::span<const Scenario> scenarios,
                                        const MapSet& maps);

struct TrainConfig {
    int n_segments = 6;
    int epochs = 100;
    int batch = 128;
    double lr = 1e-4;
    // When > 0, the learning rate follows a cosine from lr down to lr_end
    // across the epochs; the hinge losses need a settling phase to stay
    // strictly inside the goal tolerances instead of oscillating around them.
    double lr_end = 0.0;
    // When > 0, batch gradients are rescaled to this global L2 norm cap; a
    // sample that newly trips a collision or curvature hinge can otherwise
    // inject a step that throws the whole net.
    double clip_norm = 0.0;
    double gamma = 1e-4;
    bool tcurv_enabled = true;
    uint64_t seed = 1;
    std::string out_dir;  // checkpoints (best, last) + metrics.jsonl
    ExecMode mode = ExecMode::Parallel;
    std::function<void(const struct EpochStats&)> on_epoch;  // progress reporting
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
    LossBreakdown train_mean;
    LossBreakdown val_mean;
    double seconds = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = 0;  // 1-based; 0 when no epoch completed
    std::string best_checkpoint;  // prefix, empty when no epoch completed
    std::string last_checkpoint;  // prefix
    bool aborted_non_finite = false;
};

// Shuffled mini-batches, mean batch gradient, Adam update. Per epoch: train
// accuracy (feasible fraction seen during the epoch's batches), a fresh
// validation pass, one JSONL metrics record, and checkpoints (last every
// epoch, best on validation accuracy). A NonFiniteGradient aborts training
// and leaves the last-good parameters in the last checkpoint.
TrainResult train(PolicyNet& net, const Dataset& data, const TrainConfig& cfg,
                  const VehicleParams& params = kia_rio());

struct SplitMetrics {
    int count = 0;
    double accuracy = 0.0;
    double mean_turn = 0.0;    // radians, over all scenarios
    double mean_length = 0.0;  // meters, over all scenarios
    double mean_time_ms = 0.0;
    double stddev_time_ms = 0.0;
};

SplitMetrics evaluate_split(const PolicyNet& net, const Dataset& data,
                            std::string_view split, int n_segments,
                            const LossOptions& options = {},
                            const VehicleParams& params = kia_rio(),
                            ExecMode mode = ExecMode::Serial);

}  // namespace maneuver
