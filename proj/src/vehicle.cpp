#include "maneuver/vehicle.hpp"

#include <cmath>

#include "maneuver/errors.hpp"

namespace maneuver {

double steering_for_curvature(double kappa, const VehicleParams& params) {
    const double limit = curvature_limit(params);
    if (std::abs(kappa) > limit) {
        throw CurvatureExceeded("curvature " + std::to_string(kappa) +
                                " exceeds limit " + std::to_string(limit));
    }
    return std::atan(kappa * params.wheelbase);
}

std::array<Vec2, 5> footprint_points(const Pose2& pose, const VehicleParams& params) {
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    const std::array<Vec2, 5> body = footprint_body_offsets(params);
    std::array<Vec2, 5> out;
    for (size_t k = 0; k < body.size(); ++k) {
        out[k] = {pose.x + c * body[k].x - s * body[k].y,
                  pose.y + s * body[k].x + c * body[k].y};
    }
    return out;
}

std::vector<Vec2> circumference_samples(const Pose2& pose, const VehicleParams& params,
                                        double max_spacing) {
    const auto pts = footprint_points(pose, params);
    // Corner cycle FL -> FR -> RR -> RL.
    const std::array<Vec2, 4> corners = {pts[1], pts[2], pts[3], pts[4]};
    std::vector<Vec2> out;
    for (size_t i = 0; i < corners.size(); ++i) {
        const Vec2 a = corners[i];
        const Vec2 b = corners[(i + 1) % corners.size()];
        const double len = (b - a).norm();
        const int n = std::max(1, static_cast<int>(std::ceil(len / max_spacing)));
        for (int j = 0; j < n; ++j) {
            out.push_back(a + (b - a) * (static_cast<double>(j) / n));
        }
    }
    return out;
}

}  // namespace maneuver
