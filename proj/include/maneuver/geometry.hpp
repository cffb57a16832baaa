#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace maneuver {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
};

// Normalizes an angle to (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
}

// Expresses `local` (given in `frame`'s coordinates) in the world frame.
inline Pose2 compose(const Pose2& frame, const Pose2& local) {
    const double c = std::cos(frame.theta);
    const double s = std::sin(frame.theta);
    return {frame.x + c * local.x - s * local.y,
            frame.y + s * local.x + c * local.y,
            wrap_angle(frame.theta + local.theta)};
}

// Expresses the world-frame pose `global` in `frame`'s coordinates.
inline Pose2 to_local(const Pose2& frame, const Pose2& global) {
    const double c = std::cos(frame.theta);
    const double s = std::sin(frame.theta);
    const double dx = global.x - frame.x;
    const double dy = global.y - frame.y;
    return {c * dx + s * dy, -s * dx + c * dy, wrap_angle(global.theta - frame.theta)};
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    if (len2 <= 0.0) return (p - a).norm();
    double t = (p - a).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

// Distance from a point to a polyline; a single vertex degenerates to point distance.
double polyline_distance(Vec2 p, std::span<const Vec2> polyline);

}  // namespace maneuver
