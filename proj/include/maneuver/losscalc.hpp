#pragma once

// Scalar-generic loss terms over a discretized path. The double instantiation
// backs the public loss API; the ad::Var instantiation is what training
// differentiates. All discrete choices (gates, hinge activations, abs signs,
// nearest-segment picks, wrap branches) are made on plain values and can be
// recorded into a LossSignature so callers can tell smooth regimes apart.

#include <cmath>
#include <limits>
#include <span>

#include "maneuver/loss.hpp"
#include "maneuver/pathcalc.hpp"

namespace maneuver {

template <class T>
struct LossTermsT {
    T coll{};
    T curv{};
    T over{};
    T tcurv{};
    T total{};
    bool feasible = false;
};

namespace detail {

inline void sig_mix(LossSignature* sig, uint64_t v) {
    if (sig) sig->mix(v);
}

// abs with the sign choice recorded.
template <class T>
T signed_abs(const T& x, LossSignature* sig) {
    using std::abs;
    const double v = value_of(x);
    sig_mix(sig, v > 0.0 ? 1 : (v < 0.0 ? 2 : 3));
    return abs(x);
}

// max(x, 0) with the activation recorded; inactive branches contribute no nodes.
template <class T>
T hinge(const T& x, LossSignature* sig) {
    if (value_of(x) > 0.0) {
        sig_mix(sig, 5);
        return x;
    }
    sig_mix(sig, 4);
    return T(0.0);
}

// Distance from a tracked point to a fixed polyline. The closest segment and
// its clamp regime are chosen on values; only the final formula touches T.
template <class T>
T polyline_distance_t(const T& px, const T& py, std::span<const Vec2> poly,
                      LossSignature* sig) {
    using std::sqrt;
    const Vec2 pv{value_of(px), value_of(py)};

    size_t best_i = 0;
    int regime = 0;  // 0: clamp to a, 1: clamp to b, 2: interior
    double best = std::numeric_limits<double>::max();
    if (poly.size() == 1) {
        regime = 0;
    } else {
        for (size_t i = 0; i + 1 < poly.size(); ++i) {
            const Vec2 ab = poly[i + 1] - poly[i];
            const double len2 = ab.dot(ab);
            double t = len2 > 0.0 ? (pv - poly[i]).dot(ab) / len2 : 0.0;
            int r = 2;
            if (t <= 0.0) {
                t = 0.0;
                r = 0;
            } else if (t >= 1.0) {
                t = 1.0;
                r = 1;
            }
            const double d = (pv - (poly[i] + ab * t)).norm();
            if (d < best) {
                best = d;
                best_i = i;
                regime = r;
            }
        }
    }
    sig_mix(sig, best_i * 4 + regime);

    const Vec2 a = poly[best_i];
    if (regime == 2) {
        const Vec2 b = poly[best_i + 1];
        const double len = (b - a).norm();
        const T cross = (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
        return signed_abs(cross, sig) * (1.0 / len);
    }
    const Vec2 end = regime == 0 ? a : poly[best_i + 1];
    const T dx = px - end.x;
    const T dy = py - end.y;
    return sqrt(dx * dx + dy * dy);
}

}  // namespace detail

// Wrap to (-pi, pi] as a constant shift, so gradients pass through.
template <class T>
T wrap_angle_t(const T& a, LossSignature* sig) {
    const double two_pi = 2.0 * std::numbers::pi;
    double k = std::round(value_of(a) / two_pi);
    if (value_of(a) - k * two_pi <= -std::numbers::pi) k -= 1.0;
    detail::sig_mix(sig, static_cast<uint64_t>(static_cast<int64_t>(k) + (1ll << 32)));
    if (k == 0.0) return a;
    return a - k * two_pi;
}

template <class T>
LossTermsT<T> loss_terms_t(
    const std::vector<std::array<PathSampleT<T>, kSamplesPerSegment>>& segs,
    const OccupancyGrid& grid, const VehicleParams& params, std::span<const Vec2> ref_path,
    const GoalRegion& goal, const LossOptions& opt, LossSignature* sig = nullptr) {
    using std::cos;
    using std::sin;
    LossTermsT<T> out;
    const double kappa_max = curvature_limit(params);
    const auto body = footprint_body_offsets(params);

    T coll(0.0), curv(0.0), tcurv(0.0);
    bool any_hit = false;
    for (size_t i = 0; i < segs.size(); ++i) {
        const auto& seg = segs[i];
        for (int j = 1; j < kSamplesPerSegment; ++j) {
            const PathSampleT<T>& s = seg[j];
            const Pose2 pose{value_of(s.gx), value_of(s.gy), value_of(s.heading)};
            const bool hit = footprint_collides(grid, pose, params);
            any_hit = any_hit || hit;
            detail::sig_mix(sig, (i * kSamplesPerSegment + j) * 2 + (hit ? 1 : 0));
            if (hit && !ref_path.empty()) {
                const T c = cos(s.heading);
                const T sn = sin(s.heading);
                T dist_sum(0.0);
                for (const Vec2& b : body) {
                    const T px = s.gx + c * b.x - sn * b.y;
                    const T py = s.gy + sn * b.x + c * b.y;
                    dist_sum += detail::polyline_distance_t(px, py, ref_path, sig);
                }
                coll += dist_sum * s.chord;
            }

            const T excess = detail::signed_abs(s.kappa, sig) - kappa_max;
            if (value_of(excess) > 0.0) {
                detail::sig_mix(sig, 7);
                curv += excess * s.chord;
            } else {
                detail::sig_mix(sig, 6);
            }
        }

        // Total-curvature sum over j=1..127; the last pair reaches into the
        // next segment's first sample and is dropped on the final segment.
        for (int j = 1; j + 1 < kSamplesPerSegment; ++j) {
            tcurv += detail::signed_abs(seg[j + 1].kappa - seg[j].kappa, sig);
        }
        if (i + 1 < segs.size()) {
            tcurv += detail::signed_abs(segs[i + 1][0].kappa - seg.back().kappa, sig);
        }
    }

    const PathSampleT<T>& end = segs.back().back();
    const T dx = end.gx - goal.x;
    const T dy = end.gy - goal.y;
    const T dth = wrap_angle_t(end.heading - goal.theta, sig);
    T over = detail::hinge(detail::signed_abs(dx, sig) - goal.pos_tol, sig) +
             detail::hinge(detail::signed_abs(dy, sig) - goal.pos_tol, sig) +
             opt.angle_weight * detail::hinge(detail::signed_abs(dth, sig) - goal.ang_tol, sig);

    out.coll = coll;
    out.curv = curv;
    out.over = over;
    out.tcurv = opt.gamma * tcurv;
    // Feasibility gates on the collision tests themselves, not on the coll
    // value: with a reference running through the body the distances (and so
    // the value) can vanish while the path still collides.
    out.feasible =
        !any_hit && value_of(curv) == 0.0 && value_of(over) == 0.0 && value_of(coll) == 0.0;
    out.total = coll + curv + over;
    if (out.feasible && opt.tcurv_enabled) out.total += out.tcurv;
    detail::sig_mix(sig, out.feasible ? 11 : 10);
    return out;
}

}  // namespace maneuver
