#pragma once

#include <array>
#include <vector>

#include "maneuver/geometry.hpp"

namespace maneuver {

struct VehicleParams {
    double wheelbase = 2.8;       // rear to front axle
    double rear_overhang = 0.67;  // rear axle to rear bumper
    double front_overhang = 3.375;  // rear axle to front bumper
    double width = 1.72;
    double max_steering = 0.57;  // |beta| bound, radians

    double body_length() const { return rear_overhang + front_overhang; }
};

// Kia Rio dimensions used throughout the experiments.
inline VehicleParams kia_rio() { return VehicleParams{}; }

// q = [beta, theta, x, y]: virtual steering angle, heading, rear-axle position.
struct Configuration {
    double beta = 0.0;
    double theta = 0.0;
    double x = 0.0;
    double y = 0.0;

    Pose2 pose() const { return {x, y, theta}; }
};

inline double curvature_for_steering(double beta, double wheelbase) {
    return std::tan(beta) / wheelbase;
}

inline double curvature_limit(const VehicleParams& params) {
    return curvature_for_steering(params.max_steering, params.wheelbase);
}

// Inverse of curvature_for_steering; throws CurvatureExceeded outside the steering range.
double steering_for_curvature(double kappa, const VehicleParams& params);

// Characteristic points in the body frame, ordered
// [guiding, front-left, front-right, rear-right, rear-left].
inline std::array<Vec2, 5> footprint_body_offsets(const VehicleParams& params) {
    const double hw = params.width / 2.0;
    return {{{0.0, 0.0},
             {params.front_overhang, hw},
             {params.front_overhang, -hw},
             {-params.rear_overhang, -hw},
             {-params.rear_overhang, hw}}};
}

// footprint_body_offsets placed at a world pose.
std::array<Vec2, 5> footprint_points(const Pose2& pose, const VehicleParams& params);

// Points along the body rectangle's boundary, consecutive spacing <= max_spacing,
// all 4 corners included.
std::vector<Vec2> circumference_samples(const Pose2& pose, const VehicleParams& params,
                                        double max_spacing);

}  // namespace maneuver
