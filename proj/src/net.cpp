#include "maneuver/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "maneuver/errors.hpp"

namespace maneuver {

namespace {

void fc_forward(const double* in, int n_in, const double* w, const double* b, double* out,
                int n_out) {
    for (int o = 0; o < n_out; ++o) {
        const double* row = w + static_cast<size_t>(o) * n_in;
        double acc = b[o];
        for (int i = 0; i < n_in; ++i) acc += row[i] * in[i];
        out[o] = acc;
    }
}

// d_out is the gradient at the (pre-activation) output.
void fc_backward(const double* in, int n_in, const double* w, const double* d_out, int n_out,
                 double* d_in, double* d_w, double* d_b) {
    if (d_in) std::fill(d_in, d_in + n_in, 0.0);
    for (int o = 0; o < n_out; ++o) {
        const double g = d_out[o];
        if (d_b) d_b[o] += g;
        const double* row = w + static_cast<size_t>(o) * n_in;
        double* grow = d_w ? d_w + static_cast<size_t>(o) * n_in : nullptr;
        if (g == 0.0) continue;
        for (int i = 0; i < n_in; ++i) {
            if (grow) grow[i] += g * in[i];
            if (d_in) d_in[i] += g * row[i];
        }
    }
}

void tanh_inplace(double* v, int n) {
    for (int i = 0; i < n; ++i) v[i] = std::tanh(v[i]);
}

// Converts gradient at tanh output to gradient at its input, given outputs t.
void tanh_backward(const double* t, double* g, int n) {
    for (int i = 0; i < n; ++i) g[i] *= 1.0 - t[i] * t[i];
}

// 3x3, stride 1, zero padding 1; output overwritten. Post-activation ReLU is
// applied by the caller so the stored plane doubles as the backward mask.
void conv3x3_forward(const double* in, int c_in, int h, int w_, const double* w,
                     const double* b, double* out, int c_out) {
    const size_t plane = static_cast<size_t>(h) * w_;
    for (int oc = 0; oc < c_out; ++oc) {
        std::fill(out + oc * plane, out + (oc + 1) * plane, b[oc]);
    }
    for (int oc = 0; oc < c_out; ++oc) {
        for (int ic = 0; ic < c_in; ++ic) {
            const double* wbase = w + ((static_cast<size_t>(oc) * c_in + ic) * 9);
            for (int ky = 0; ky < 3; ++ky) {
                const int y0 = std::max(0, 1 - ky);
                const int y1 = std::min(h, h + 1 - ky);
                for (int kx = 0; kx < 3; ++kx) {
                    const double wv = wbase[ky * 3 + kx];
                    if (wv == 0.0) continue;
                    const int x0 = std::max(0, 1 - kx);
                    const int x1 = std::min(w_, w_ + 1 - kx);
                    for (int y = y0; y < y1; ++y) {
                        const double* irow = in + ic * plane + (y + ky - 1) * w_ + (x0 + kx - 1);
                        double* orow = out + oc * plane + y * w_ + x0;
                        for (int x = 0; x < x1 - x0; ++x) orow[x] += wv * irow[x];
                    }
                }
            }
        }
    }
}

void conv3x3_backward(const double* in, int c_in, int h, int w_, const double* w,
                      const double* d_out, int c_out, double* d_in, double* d_w,
                      double* d_b) {
    const size_t plane = static_cast<size_t>(h) * w_;
    if (d_in) std::fill(d_in, d_in + c_in * plane, 0.0);
    for (int oc = 0; oc < c_out; ++oc) {
        const double* gplane = d_out + oc * plane;
        double acc = 0.0;
        for (size_t i = 0; i < plane; ++i) acc += gplane[i];
        d_b[oc] += acc;
    }
    for (int oc = 0; oc < c_out; ++oc) {
        for (int ic = 0; ic < c_in; ++ic) {
            const double* wbase = w + ((static_cast<size_t>(oc) * c_in + ic) * 9);
            double* gwbase = d_w + ((static_cast<size_t>(oc) * c_in + ic) * 9);
            for (int ky = 0; ky < 3; ++ky) {
                const int y0 = std::max(0, 1 - ky);
                const int y1 = std::min(h, h + 1 - ky);
                for (int kx = 0; kx < 3; ++kx) {
                    const int x0 = std::max(0, 1 - kx);
                    const int x1 = std::min(w_, w_ + 1 - kx);
                    const double wv = wbase[ky * 3 + kx];
                    double wg = 0.0;
                    for (int y = y0; y < y1; ++y) {
                        const double* irow = in + ic * plane + (y + ky - 1) * w_ + (x0 + kx - 1);
                        double* dirow =
                            d_in ? d_in + ic * plane + (y + ky - 1) * w_ + (x0 + kx - 1)
                                 : nullptr;
                        const double* grow = d_out + oc * plane + y * w_ + x0;
                        const int n = x1 - x0;
                        for (int x = 0; x < n; ++x) {
                            wg += grow[x] * irow[x];
                            if (dirow) dirow[x] += wv * grow[x];
                        }
                    }
                    gwbase[ky * 3 + kx] += wg;
                }
            }
        }
    }
}

void maxpool2x2_forward(const double* in, int c, int h, int w, double* out, int* idx) {
    const int oh = h / 2;
    const int ow = w / 2;
    for (int ch = 0; ch < c; ++ch) {
        const double* plane = in + static_cast<size_t>(ch) * h * w;
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                int best = (2 * y) * w + 2 * x;
                double bv = plane[best];
                const int cands[3] = {(2 * y) * w + 2 * x + 1, (2 * y + 1) * w + 2 * x,
                                      (2 * y + 1) * w + 2 * x + 1};
                for (const int ci : cands) {
                    if (plane[ci] > bv) {
                        bv = plane[ci];
                        best = ci;
                    }
                }
                const size_t o = static_cast<size_t>(ch) * oh * ow + y * ow + x;
                out[o] = bv;
                idx[o] = ch * h * w + best;
            }
        }
    }
}

void maxpool2x2_backward(const double* d_out, const int* idx, size_t n_out, double* d_in,
                         size_t n_in) {
    std::fill(d_in, d_in + n_in, 0.0);
    for (size_t i = 0; i < n_out; ++i) d_in[idx[i]] += d_out[i];
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

size_t PolicyNet::add_tensor(const std::string& name, std::vector<int> shape) {
    size_t count = 1;
    for (int d : shape) count *= static_cast<size_t>(d);
    const size_t offset = params_.size();
    tensors_.push_back({name, std::move(shape), offset, count});
    params_.resize(offset + count, 0.0);
    return offset;
}

PolicyNet::PolicyNet(const NetConfig& config) : config_(config) {
    if (config_.grid_size != OccupancyGrid::kSize) {
        throw ShapeMismatch("grid_size must be 128");
    }
    int c_in = 1;
    for (int i = 0; i < 4; ++i) {
        const int c_out = config_.conv_channels[i];
        conv_[i].w = add_tensor("map.conv" + std::to_string(i + 1) + ".w",
                                {c_out, c_in, 3, 3});
        conv_[i].b = add_tensor("map.conv" + std::to_string(i + 1) + ".b", {c_out});
        c_in = c_out;
    }
    const int side = config_.grid_size / 16;  // four 2x2 pools
    const int flat = config_.conv_channels[3] * side * side;
    map_fc1_.w = add_tensor("map.fc1.w", {config_.map_hidden, flat});
    map_fc1_.b = add_tensor("map.fc1.b", {config_.map_hidden});
    map_fc2_.w = add_tensor("map.fc2.w", {config_.latent, config_.map_hidden});
    map_fc2_.b = add_tensor("map.fc2.b", {config_.latent});
    conf_fc1_.w = add_tensor("conf.fc1.w", {config_.conf_hidden, config_.conf_features});
    conf_fc1_.b = add_tensor("conf.fc1.b", {config_.conf_hidden});
    conf_fc2_.w = add_tensor("conf.fc2.w", {config_.latent, config_.conf_hidden});
    conf_fc2_.b = add_tensor("conf.fc2.b", {config_.latent});
    trunk_.w = add_tensor("trunk.fc.w", {config_.trunk, 2 * config_.latent});
    trunk_.b = add_tensor("trunk.fc.b", {config_.trunk});
    const char* head_names[4] = {"head.x", "head.y", "head.dy", "head.ddy"};
    for (int hidx = 0; hidx < 4; ++hidx) {
        head_fc1_[hidx].w = add_tensor(std::string(head_names[hidx]) + ".fc1.w",
                                       {config_.head_hidden, config_.trunk});
        head_fc1_[hidx].b =
            add_tensor(std::string(head_names[hidx]) + ".fc1.b", {config_.head_hidden});
        head_fc2_[hidx].w =
            add_tensor(std::string(head_names[hidx]) + ".fc2.w", {1, config_.head_hidden});
        head_fc2_[hidx].b = add_tensor(std::string(head_names[hidx]) + ".fc2.b", {1});
    }
    initialize(config_.init_seed);
}

void PolicyNet::initialize(uint64_t seed) {
    config_.init_seed = seed;
    std::mt19937_64 rng(seed);
    for (const TensorInfo& t : tensors_) {
        // fan_in: conv [oc, ic, 3, 3] -> ic*9; fc [out, in] -> in. Bias tensors
        // share the bound of their layer's weight tensor (the one just before).
        size_t fan = 1;
        if (t.shape.size() == 4) {
            fan = static_cast<size_t>(t.shape[1]) * t.shape[2] * t.shape[3];
        } else if (t.shape.size() == 2) {
            fan = static_cast<size_t>(t.shape[1]);
        } else {
            // bias: find the matching weight tensor by name prefix
            for (const TensorInfo& w : tensors_) {
                if (w.name.size() == t.name.size() &&
                    w.name.compare(0, w.name.size() - 1, t.name, 0, t.name.size() - 1) == 0 &&
                    w.name.back() == 'w' && t.name.back() == 'b') {
                    fan = w.shape.size() == 4
                              ? static_cast<size_t>(w.shape[1]) * w.shape[2] * w.shape[3]
                              : static_cast<size_t>(w.shape[1]);
                    break;
                }
            }
        }
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (size_t i = 0; i < t.count; ++i) params_[t.offset + i] = dist(rng);
    }
}

void PolicyNet::map_forward(const OccupancyGrid& grid, MapActivations& act) const {
    const int n = config_.grid_size;
    act.input.resize(static_cast<size_t>(n) * n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            act.input[r * n + c] = grid.cell_occupied(r, c) ? 1.0 : 0.0;
        }
    }
    const double* in = act.input.data();
    int c_in = 1;
    int side = n;
    for (int i = 0; i < 4; ++i) {
        const int c_out = config_.conv_channels[i];
        act.conv[i].resize(static_cast<size_t>(c_out) * side * side);
        conv3x3_forward(in, c_in, side, side, at(conv_[i].w), at(conv_[i].b),
                        act.conv[i].data(), c_out);
        for (double& v : act.conv[i]) v = v > 0.0 ? v : 0.0;
        const int oside = side / 2;
        act.pool[i].resize(static_cast<size_t>(c_out) * oside * oside);
        act.pool_idx[i].resize(act.pool[i].size());
        maxpool2x2_forward(act.conv[i].data(), c_out, side, side, act.pool[i].data(),
                           act.pool_idx[i].data());
        in = act.pool[i].data();
        c_in = c_out;
        side = oside;
    }
    const int flat = c_in * side * side;
    act.flat_hidden.resize(config_.map_hidden);
    fc_forward(in, flat, at(map_fc1_.w), at(map_fc1_.b), act.flat_hidden.data(),
               config_.map_hidden);
    tanh_inplace(act.flat_hidden.data(), config_.map_hidden);
    act.latent.resize(config_.latent);
    fc_forward(act.flat_hidden.data(), config_.map_hidden, at(map_fc2_.w), at(map_fc2_.b),
               act.latent.data(), config_.latent);
}

void PolicyNet::step_forward(const std::array<double, 9>& features,
                             const MapActivations& map, StepActivations& act) const {
    if (static_cast<int>(map.latent.size()) != config_.latent) {
        throw ShapeMismatch("map latent not computed");
    }
    act.features = features;
    act.features[0] *= kPositionScale;
    act.features[1] *= kPositionScale;
    act.features[5] *= kPositionScale;
    act.features[6] *= kPositionScale;

    act.conf_hidden.resize(config_.conf_hidden);
    fc_forward(act.features.data(), config_.conf_features, at(conf_fc1_.w), at(conf_fc1_.b),
               act.conf_hidden.data(), config_.conf_hidden);
    tanh_inplace(act.conf_hidden.data(), config_.conf_hidden);
    act.conf_out.resize(config_.latent);
    fc_forward(act.conf_hidden.data(), config_.conf_hidden, at(conf_fc2_.w), at(conf_fc2_.b),
               act.conf_out.data(), config_.latent);
    tanh_inplace(act.conf_out.data(), config_.latent);

    act.trunk_in.resize(2 * config_.latent);
    std::copy(map.latent.begin(), map.latent.end(), act.trunk_in.begin());
    std::copy(act.conf_out.begin(), act.conf_out.end(),
              act.trunk_in.begin() + config_.latent);
    act.trunk_out.resize(config_.trunk);
    fc_forward(act.trunk_in.data(), 2 * config_.latent, at(trunk_.w), at(trunk_.b),
               act.trunk_out.data(), config_.trunk);
    tanh_inplace(act.trunk_out.data(), config_.trunk);

    for (int hidx = 0; hidx < 4; ++hidx) {
        act.head_hidden[hidx].resize(config_.head_hidden);
        fc_forward(act.trunk_out.data(), config_.trunk, at(head_fc1_[hidx].w),
                   at(head_fc1_[hidx].b), act.head_hidden[hidx].data(), config_.head_hidden);
        tanh_inplace(act.head_hidden[hidx].data(), config_.head_hidden);
        double raw = 0.0;
        fc_forward(act.head_hidden[hidx].data(), config_.head_hidden, at(head_fc2_[hidx].w),
                   at(head_fc2_[hidx].b), &raw, 1);
        act.head_raw[hidx] = raw;
    }
    act.outputs[0] = 10.0 * sigmoid(act.head_raw[0]);
    act.outputs[1] = act.head_raw[1];
    act.outputs[2] = act.head_raw[2];
    act.outputs[3] = act.head_raw[3];
}

void PolicyNet::step_backward(const StepActivations& act, const MapActivations& map,
                              const std::array<double, 4>& dout,
                              std::array<double, 9>* d_features,
                              std::vector<double>* d_latent,
                              std::vector<double>* param_grads) const {
    std::vector<double>& g = *param_grads;
    std::array<double, 4> d_raw = dout;
    // x head: x = 10*sigmoid(raw); dx/draw = x*(1 - x/10)
    d_raw[0] = dout[0] * act.outputs[0] * (1.0 - act.outputs[0] / 10.0);

    std::vector<double> d_trunk_out(config_.trunk, 0.0);
    std::vector<double> d_head_hidden(config_.head_hidden);
    std::vector<double> d_tmp(config_.trunk);
    for (int hidx = 0; hidx < 4; ++hidx) {
        fc_backward(act.head_hidden[hidx].data(), config_.head_hidden, at(head_fc2_[hidx].w),
                    &d_raw[hidx], 1, d_head_hidden.data(), g.data() + head_fc2_[hidx].w,
                    g.data() + head_fc2_[hidx].b);
        tanh_backward(act.head_hidden[hidx].data(), d_head_hidden.data(),
                      config_.head_hidden);
        fc_backward(act.trunk_out.data(), config_.trunk, at(head_fc1_[hidx].w),
                    d_head_hidden.data(), config_.head_hidden, d_tmp.data(),
                    g.data() + head_fc1_[hidx].w, g.data() + head_fc1_[hidx].b);
        for (int i = 0; i < config_.trunk; ++i) d_trunk_out[i] += d_tmp[i];
    }
    tanh_backward(act.trunk_out.data(), d_trunk_out.data(), config_.trunk);

    std::vector<double> d_trunk_in(2 * config_.latent);
    fc_backward(act.trunk_in.data(), 2 * config_.latent, at(trunk_.w), d_trunk_out.data(),
                config_.trunk, d_trunk_in.data(), g.data() + trunk_.w, g.data() + trunk_.b);

    if (d_latent) {
        for (int i = 0; i < config_.latent; ++i) (*d_latent)[i] += d_trunk_in[i];
    }
    (void)map;

    std::vector<double> d_conf_out(d_trunk_in.begin() + config_.latent, d_trunk_in.end());
    tanh_backward(act.conf_out.data(), d_conf_out.data(), config_.latent);
    std::vector<double> d_conf_hidden(config_.conf_hidden);
    fc_backward(act.conf_hidden.data(), config_.conf_hidden, at(conf_fc2_.w),
                d_conf_out.data(), config_.latent, d_conf_hidden.data(),
                g.data() + conf_fc2_.w, g.data() + conf_fc2_.b);
    tanh_backward(act.conf_hidden.data(), d_conf_hidden.data(), config_.conf_hidden);
    std::array<double, 9> d_feat{};
    fc_backward(act.features.data(), config_.conf_features, at(conf_fc1_.w),
                d_conf_hidden.data(), config_.conf_hidden, d_feat.data(),
                g.data() + conf_fc1_.w, g.data() + conf_fc1_.b);
    if (d_features) {
        d_feat[0] *= kPositionScale;
        d_feat[1] *= kPositionScale;
        d_feat[5] *= kPositionScale;
        d_feat[6] *= kPositionScale;
        for (int i = 0; i < 9; ++i) (*d_features)[i] += d_feat[i];
    }
}

void PolicyNet::map_backward(const MapActivations& act, const std::vector<double>& d_latent,
                             std::vector<double>* param_grads) const {
    std::vector<double>& g = *param_grads;
    const int side = config_.grid_size / 16;
    const int flat = config_.conv_channels[3] * side * side;

    std::vector<double> d_hidden(config_.map_hidden);
    fc_backward(act.flat_hidden.data(), config_.map_hidden, at(map_fc2_.w), d_latent.data(),
                config_.latent, d_hidden.data(), g.data() + map_fc2_.w,
                g.data() + map_fc2_.b);
    tanh_backward(act.flat_hidden.data(), d_hidden.data(), config_.map_hidden);

    std::vector<double> d_pool(flat);
    fc_backward(act.pool[3].data(), flat, at(map_fc1_.w), d_hidden.data(), config_.map_hidden,
                d_pool.data(), g.data() + map_fc1_.w, g.data() + map_fc1_.b);

    std::vector<double> d_conv;
    std::vector<double> d_prev;
    int cur_side = side;
    for (int i = 3; i >= 0; --i) {
        const int c_out = config_.conv_channels[i];
        const int in_side = cur_side * 2;  // conv output side == its input side
        d_conv.resize(static_cast<size_t>(c_out) * in_side * in_side);
        maxpool2x2_backward(d_pool.data(), act.pool_idx[i].data(), d_pool.size(),
                            d_conv.data(), d_conv.size());
        // ReLU mask from the stored post-activation plane.
        for (size_t k = 0; k < d_conv.size(); ++k) {
            if (act.conv[i][k] <= 0.0) d_conv[k] = 0.0;
        }
        const double* conv_in = i == 0 ? act.input.data() : act.pool[i - 1].data();
        const int c_in = i == 0 ? 1 : config_.conv_channels[i - 1];
        const bool need_d_in = i > 0;
        if (need_d_in) d_prev.resize(static_cast<size_t>(c_in) * in_side * in_side);
        conv3x3_backward(conv_in, c_in, in_side, in_side, at(conv_[i].w), d_conv.data(),
                         c_out, need_d_in ? d_prev.data() : nullptr, g.data() + conv_[i].w,
                         g.data() + conv_[i].b);
        d_pool.swap(d_prev);
        cur_side = in_side;
    }
}

void save_checkpoint(const PolicyNet& net, const std::string& prefix) {
    nlohmann::json manifest;
    manifest["format"] = 1;
    manifest["dtype"] = "float64";
    const NetConfig& c = net.config();
    manifest["config"] = {
        {"grid_size", c.grid_size},     {"conv_channels", c.conv_channels},
        {"map_hidden", c.map_hidden},   {"latent", c.latent},
        {"conf_hidden", c.conf_hidden}, {"conf_features", c.conf_features},
        {"trunk", c.trunk},             {"head_hidden", c.head_hidden},
        {"init_seed", c.init_seed},
    };
    manifest["param_count"] = net.param_count();
    nlohmann::json tensors = nlohmann::json::array();
    for (const TensorInfo& t : net.tensors()) {
        tensors.push_back(
            {{"name", t.name}, {"shape", t.shape}, {"offset", t.offset}, {"count", t.count}});
    }
    manifest["tensors"] = std::move(tensors);

    std::ofstream mf(prefix + ".json");
    if (!mf) throw CheckpointError("cannot write " + prefix + ".json");
    mf << manifest.dump(2) << "\n";
    mf.close();

    std::ofstream bf(prefix + ".bin", std::ios::binary);
    if (!bf) throw CheckpointError("cannot write " + prefix + ".bin");
    bf.write(reinterpret_cast<const char*>(net.params().data()),
             static_cast<std::streamsize>(net.param_count() * sizeof(double)));
    if (!bf) throw CheckpointError("write failed for " + prefix + ".bin");
}

PolicyNet load_checkpoint(const std::string& prefix) {
    std::ifstream mf(prefix + ".json");
    if (!mf) throw CheckpointError("cannot open " + prefix + ".json");
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError("bad manifest " + prefix + ".json: " + e.what());
    }
    try {
        if (manifest.at("dtype") != "float64") {
            throw CheckpointError("unsupported dtype in " + prefix + ".json");
        }
        const auto& jc = manifest.at("config");
        NetConfig c;
        c.grid_size = jc.at("grid_size");
        c.conv_channels = jc.at("conv_channels");
        c.map_hidden = jc.at("map_hidden");
        c.latent = jc.at("latent");
        c.conf_hidden = jc.at("conf_hidden");
        c.conf_features = jc.at("conf_features");
        c.trunk = jc.at("trunk");
        c.head_hidden = jc.at("head_hidden");
        c.init_seed = jc.at("init_seed");

        PolicyNet net(c);
        if (net.param_count() != manifest.at("param_count").get<size_t>()) {
            throw CheckpointError("parameter count mismatch in " + prefix);
        }
        const auto& jt = manifest.at("tensors");
        if (jt.size() != net.tensors().size()) {
            throw CheckpointError("tensor table mismatch in " + prefix);
        }
        for (size_t i = 0; i < jt.size(); ++i) {
            const TensorInfo& t = net.tensors()[i];
            if (jt[i].at("name") != t.name || jt[i].at("offset") != t.offset ||
                jt[i].at("count") != t.count ||
                jt[i].at("shape").get<std::vector<int>>() != t.shape) {
                throw CheckpointError("tensor " + t.name + " mismatch in " + prefix);
            }
        }

        std::ifstream bf(prefix + ".bin", std::ios::binary);
        if (!bf) throw CheckpointError("cannot open " + prefix + ".bin");
        bf.read(reinterpret_cast<char*>(net.params().data()),
                static_cast<std::streamsize>(net.param_count() * sizeof(double)));
        if (bf.gcount() !=
            static_cast<std::streamsize>(net.param_count() * sizeof(double))) {
            throw CheckpointError("truncated blob " + prefix + ".bin");
        }
        char extra;
        if (bf.read(&extra, 1)) {
            throw CheckpointError("oversized blob " + prefix + ".bin");
        }
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError("bad manifest " + prefix + ".json: " + e.what());
    }
}

}  // namespace maneuver
