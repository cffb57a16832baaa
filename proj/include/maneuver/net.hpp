#pragma once

// The policy network: map processor (4x [3x3 conv, ReLU, 2x2 max-pool]),
// configuration processor, shared trunk, and 4 scalar heads. Parameters live
// in one flat vector; forward/backward are hand-written over the fixed graph.
// The map branch is split out so one latent can serve a whole rollout.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "maneuver/gridmap.hpp"

namespace maneuver {

struct NetConfig {
    int grid_size = 128;
    std::array<int, 4> conv_channels = {8, 16, 32, 64};
    int map_hidden = 256;  // FC after flatten
    int latent = 128;      // map-branch output, also config-branch output
    int conf_hidden = 64;
    int conf_features = 9;  // (x, y, sin, cos, beta) + (xk, yk, sink, cosk)
    int trunk = 256;
    int head_hidden = 64;
    uint64_t init_seed = 1;

    bool operator==(const NetConfig&) const = default;
};

struct TensorInfo {
    std::string name;
    std::vector<int> shape;
    size_t offset = 0;
    size_t count = 0;
};

// Per-evaluation buffers for the map branch; reusable across calls.
struct MapActivations {
    std::vector<double> input;                  // grid as 0/1
    std::array<std::vector<double>, 4> conv;    // post-ReLU conv outputs
    std::array<std::vector<double>, 4> pool;    // post-pool outputs
    std::array<std::vector<int>, 4> pool_idx;   // argmax source index
    std::vector<double> flat_hidden;            // post-tanh map FC hidden
    std::vector<double> latent;                 // linear 128 output
};

struct StepActivations {
    std::array<double, 9> features{};
    std::vector<double> conf_hidden;  // post-tanh
    std::vector<double> conf_out;     // post-tanh 128
    std::vector<double> trunk_in;     // concat(map latent, conf_out)
    std::vector<double> trunk_out;    // post-tanh 256
    std::array<std::vector<double>, 4> head_hidden;  // post-tanh per head
    std::array<double, 4> head_raw{};                // linear head outputs
    std::array<double, 4> outputs{};                 // x_end, y_end, dy, ddy
};

class PolicyNet {
  public:
    explicit PolicyNet(const NetConfig& config = {});

    const NetConfig& config() const { return config_; }
    size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    const std::vector<TensorInfo>& tensors() const { return tensors_; }

    // Deterministic re-init: every tensor uniform in +-1/sqrt(fan_in).
    void initialize(uint64_t seed);

    void map_forward(const OccupancyGrid& grid, MapActivations& act) const;

    // features = (x, y, sin, cos, beta, xk, yk, sink, cosk) raw; positions are
    // normalized inside. outputs = (x_end in (0,10), y_end, dy, ddy).
    void step_forward(const std::array<double, 9>& features, const MapActivations& map,
                      StepActivations& act) const;

    // dout is d(loss)/d(outputs). Accumulates into param_grads (sized
    // param_count), d_features, and d_latent.
    void step_backward(const StepActivations& act, const MapActivations& map,
                       const std::array<double, 4>& dout, std::array<double, 9>* d_features,
                       std::vector<double>* d_latent, std::vector<double>* param_grads) const;

    void map_backward(const MapActivations& act, const std::vector<double>& d_latent,
                      std::vector<double>* param_grads) const;

    // Positions (x, y, xk, yk) are scaled by this before entering the config
    // branch, keeping tanh layers out of saturation for map-scale coordinates.
    static constexpr double kPositionScale = 1.0 / 25.6;

  private:
    struct Layer {
        size_t w = 0;  // offset of weights
        size_t b = 0;  // offset of biases
    };

    size_t add_tensor(const std::string& name, std::vector<int> shape);
    const double* at(size_t offset) const { return params_.data() + offset; }

    NetConfig config_;
    std::vector<double> params_;
    std::vector<TensorInfo> tensors_;

    // conv[i]: weights [out][in][3][3]; fc: weights [out][in]
    std::array<Layer, 4> conv_;
    Layer map_fc1_, map_fc2_;
    Layer conf_fc1_, conf_fc2_;
    Layer trunk_;
    std::array<Layer, 4> head_fc1_, head_fc2_;

    friend struct NetTestPeek;
};

// Checkpoint = <prefix>.json manifest + <prefix>.bin raw float64 blob,
// bit-exact on round trip. Throws CheckpointError.
void save_checkpoint(const PolicyNet& net, const std::string& prefix);
PolicyNet load_checkpoint(const std::string& prefix);

}  // namespace maneuver
