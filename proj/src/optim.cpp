#include "maneuver/optim.hpp"

#include <cmath>

#include "maneuver/errors.hpp"

namespace maneuver {

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, const AdamConfig& config) {
    if (params.size() != grads.size()) {
        throw ShapeMismatch("adam_step: params/grads size mismatch");
    }
    if (state.m.size() != params.size()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.t = 0;
    }
    ++state.t;
    const double bc1 = 1.0 - std::pow(config.beta1, state.t);
    const double bc2 = 1.0 - std::pow(config.beta2, state.t);
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
}

}  // namespace maneuver
