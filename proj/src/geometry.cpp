#include "maneuver/geometry.hpp"

#include <limits>

namespace maneuver {

double polyline_distance(Vec2 p, std::span<const Vec2> polyline) {
    if (polyline.empty()) return std::numeric_limits<double>::infinity();
    if (polyline.size() == 1) return (p - polyline[0]).norm();
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < polyline.size(); ++i) {
        best = std::min(best, point_segment_distance(p, polyline[i], polyline[i + 1]));
    }
    return best;
}

}  // namespace maneuver
