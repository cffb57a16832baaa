#include "maneuver/loss.hpp"

#include <cmath>

#include "maneuver/losscalc.hpp"

namespace maneuver {

bool goal_reached(const Configuration& endpoint, const GoalRegion& goal) {
    return std::abs(endpoint.x - goal.x) <= goal.pos_tol &&
           std::abs(endpoint.y - goal.y) <= goal.pos_tol &&
           std::abs(wrap_angle(endpoint.theta - goal.theta)) <= goal.ang_tol;
}

std::vector<Vec2> densify_polyline(std::span<const Vec2> points, double max_spacing) {
    std::vector<Vec2> out;
    if (points.empty()) return out;
    out.push_back(points[0]);
    for (size_t i = 0; i + 1 < points.size(); ++i) {
        const Vec2 a = points[i];
        const Vec2 b = points[i + 1];
        const double len = (b - a).norm();
        const int n = std::max(1, static_cast<int>(std::ceil(len / max_spacing)));
        for (int j = 1; j <= n; ++j) {
            out.push_back(a + (b - a) * (static_cast<double>(j) / n));
        }
    }
    return out;
}

double collision_loss(const DiscretizedPath& d, const OccupancyGrid& grid,
                      const VehicleParams& params, std::span<const Vec2> ref_path) {
    LossOptions opt;
    const GoalRegion goal{};  // overshoot not consumed here
    return loss_terms_t<double>(d.segments, grid, params, ref_path, goal, opt).coll;
}

double curvature_loss(const DiscretizedPath& d, double kappa_max) {
    double sum = 0.0;
    for (const auto& seg : d.segments) {
        for (int j = 1; j < kSamplesPerSegment; ++j) {
            sum += std::max(std::abs(seg[j].kappa) - kappa_max, 0.0) * seg[j].chord;
        }
    }
    return sum;
}

double overshoot_loss(const Configuration& endpoint, const GoalRegion& goal,
                      double angle_weight) {
    const double dx = std::abs(endpoint.x - goal.x) - goal.pos_tol;
    const double dy = std::abs(endpoint.y - goal.y) - goal.pos_tol;
    const double dth = std::abs(wrap_angle(endpoint.theta - goal.theta)) - goal.ang_tol;
    return std::max(dx, 0.0) + std::max(dy, 0.0) + angle_weight * std::max(dth, 0.0);
}

double total_curvature_loss(const DiscretizedPath& d, double gamma) {
    double sum = 0.0;
    for (size_t i = 0; i < d.segments.size(); ++i) {
        const auto& seg = d.segments[i];
        for (int j = 1; j + 1 < kSamplesPerSegment; ++j) {
            sum += std::abs(seg[j + 1].kappa - seg[j].kappa);
        }
        if (i + 1 < d.segments.size()) {
            sum += std::abs(d.segments[i + 1][0].kappa - seg.back().kappa);
        }
    }
    return gamma * sum;
}

LossBreakdown total_loss(const PathSpline& path, const OccupancyGrid& grid,
                         const VehicleParams& params, const GoalRegion& goal,
                         std::span<const Vec2> ref_path, const LossOptions& options,
                         LossSignature* signature) {
    const DiscretizedPath d = discretize(path);
    const LossTermsT<double> t =
        loss_terms_t<double>(d.segments, grid, params, ref_path, goal, options, signature);
    LossBreakdown b;
    b.coll = t.coll;
    b.curv = t.curv;
    b.over = t.over;
    b.tcurv = t.tcurv;
    b.total = t.total;
    b.feasible = t.feasible;
    return b;
}

}  // namespace maneuver
