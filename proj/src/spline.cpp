#include "maneuver/spline.hpp"

#include <cmath>

namespace maneuver {

double DiscretizedPath::total_length() const {
    double sum = 0.0;
    for (const auto& seg : segments) {
        for (const PathSample& s : seg) sum += s.chord;
    }
    return sum;
}

double DiscretizedPath::max_abs_kappa() const {
    double m = 0.0;
    for (const auto& seg : segments) {
        for (const PathSample& s : seg) m = std::max(m, std::abs(s.kappa));
    }
    return m;
}

double DiscretizedPath::accumulated_turn() const {
    double sum = 0.0;
    for (const auto& seg : segments) {
        for (int j = 1; j < kSamplesPerSegment; ++j) {
            sum += std::abs(seg[j].heading - seg[j - 1].heading);
        }
    }
    return sum;
}

QuinticSegment solve_segment(double start_curvature, const SegmentSpec& spec) {
    return solve_segment_t<double>(start_curvature, spec);
}

PathSpline chain(const Configuration& initial, const VehicleParams& params,
                 std::span<const SegmentSpec> specs) {
    PathSpline path;
    path.segments = chain_t<double>(initial, params, specs);
    return path;
}

DiscretizedPath discretize(const PathSpline& path) {
    DiscretizedPath d;
    d.segments = discretize_t<double>(path.segments);
    return d;
}

Configuration endpoint_configuration(const PathSpline& path, const VehicleParams& params,
                                     bool* curvature_exceeded) {
    const QuinticSegment& seg = path.segments.back();
    const PolyEval<double> e = eval_quintic(seg.a, seg.x_end);
    const double kappa = curvature_from_derivs(e.dy, e.ddy);
    Configuration q;
    q.x = seg.frame.x + seg.frame.cos_th * seg.x_end - seg.frame.sin_th * e.y;
    q.y = seg.frame.y + seg.frame.sin_th * seg.x_end + seg.frame.cos_th * e.y;
    q.theta = wrap_angle(seg.frame.theta + std::atan(e.dy));
    q.beta = std::atan(kappa * params.wheelbase);
    if (curvature_exceeded) {
        *curvature_exceeded = std::abs(kappa) > curvature_limit(params);
    }
    return q;
}

}  // namespace maneuver
