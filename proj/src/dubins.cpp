#include "maneuver/dubins.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace maneuver {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mod2pi(double x) {
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    // An arc within 1e-9 of a full turn is floating-point noise around zero,
    // not a genuine circle: without the snap, the word length would jump by
    // 2*pi*rho under epsilon perturbations of aligned poses.
    if (r >= kTwoPi - 1e-9) r = 0.0;
    return r;
}

constexpr double kNone = std::numeric_limits<double>::infinity();

// The six canonical word solutions, in normalized form: distance d in turning
// radii, start/end headings alpha/beta relative to the connecting line.
// Each returns t + p + q (total normalized length) or infinity when the word
// does not exist for this triple.

double lsl(double d, double a, double b) {
    const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
    const double p_sq = 2.0 + d * d - 2.0 * (ca * cb + sa * sb - d * (sa - sb));
    if (p_sq < 0.0) return kNone;
    const double theta = std::atan2(cb - ca, d + sa - sb);
    return mod2pi(-a + theta) + std::sqrt(p_sq) + mod2pi(b - theta);
}

double rsr(double d, double a, double b) {
    const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
    const double p_sq = 2.0 + d * d - 2.0 * (ca * cb + sa * sb - d * (sb - sa));
    if (p_sq < 0.0) return kNone;
    const double theta = std::atan2(ca - cb, d - sa + sb);
    return mod2pi(a - theta) + std::sqrt(p_sq) + mod2pi(-b + theta);
}

double rsl(double d, double a, double b) {
    const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
    const double p_sq = d * d - 2.0 + 2.0 * (ca * cb + sa * sb - d * (sa + sb));
    if (p_sq < 0.0) return kNone;
    const double p = std::sqrt(p_sq);
    const double theta = std::atan2(ca + cb, d - sa - sb) - std::atan2(2.0, p);
    return mod2pi(a - theta) + p + mod2pi(b - theta);
}

double lsr(double d, double a, double b) {
    const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
    const double p_sq = -2.0 + d * d + 2.0 * (ca * cb + sa * sb + d * (sa + sb));
    if (p_sq < 0.0) return kNone;
    const double p = std::sqrt(p_sq);
    const double theta = std::atan2(-ca - cb, d + sa + sb) - std::atan2(-2.0, p);
    return mod2pi(-a + theta) + p + mod2pi(-b + theta);
}

double rlr(double d, double a, double b) {
    const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
    const double tmp = 0.125 * (6.0 - d * d + 2.0 * (ca * cb + sa * sb + d * (sa - sb)));
    if (std::abs(tmp) >= 1.0) return kNone;
    const double p = kTwoPi - std::acos(tmp);
    const double theta = std::atan2(ca - cb, d - sa + sb);
    const double t = mod2pi(a - theta + 0.5 * p);
    return t + p + mod2pi(a - b - t + p);
}

double lrl(double d, double a, double b) {
    const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b);
    const double tmp = 0.125 * (6.0 - d * d + 2.0 * (ca * cb + sa * sb - d * (sa - sb)));
    if (std::abs(tmp) >= 1.0) return kNone;
    const double p = kTwoPi - std::acos(tmp);
    const double theta = std::atan2(-ca + cb, d + sa - sb);
    const double t = mod2pi(-a + theta + 0.5 * p);
    return t + p + mod2pi(b - a - t + p);
}

}  // namespace

double dubins_distance(const Pose2& from, const Pose2& to, double rho) {
    const double dx = to.x - from.x;
    const double dy = to.y - from.y;
    // Nearly coincident poses take the zero path. With d at noise level the
    // connecting-line angle is meaningless and the word formulas can split a
    // zero turn into two arcs summing to a full circle.
    if (std::abs(dx) < 1e-9 && std::abs(dy) < 1e-9 &&
        std::abs(wrap_angle(to.theta - from.theta)) < 1e-9) {
        return 0.0;
    }
    const double d = std::hypot(dx, dy) / rho;
    const double phi = std::atan2(dy, dx);
    const double a = mod2pi(from.theta - phi);
    const double b = mod2pi(to.theta - phi);

    double best = kNone;
    best = std::min(best, lsl(d, a, b));
    best = std::min(best, rsr(d, a, b));
    best = std::min(best, rsl(d, a, b));
    best = std::min(best, lsr(d, a, b));
    best = std::min(best, rlr(d, a, b));
    best = std::min(best, lrl(d, a, b));
    return best * rho;
}

}  // namespace maneuver
