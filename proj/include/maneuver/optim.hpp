#pragma once

#include <vector>

namespace maneuver {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second-moment state; sized lazily to the parameter vector.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long t = 0;
};

// One bias-corrected Adam update in place. params and grads must match.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, const AdamConfig& config = {});

}  // namespace maneuver
