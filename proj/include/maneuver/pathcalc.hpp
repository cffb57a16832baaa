#pragma once

// Scalar-generic core of the spline path math. Instantiated with double for
// the public planning API and with ad::Var when gradients are needed; both
// paths execute the same formulas.

#include <array>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "maneuver/errors.hpp"
#include "maneuver/geometry.hpp"
#include "maneuver/scalar.hpp"
#include "maneuver/vehicle.hpp"

namespace maneuver {

inline constexpr int kSamplesPerSegment = 128;
inline constexpr double kMaxSegmentLength = 10.0;  // network head bound on x_end

// Segment endpoint in the previous segment's local frame:
// position (x_end, y_end), slope dy = y', curvature input ddy = y''.
template <class T>
struct SegSpecT {
    T x_end{};
    T y_end{};
    T dy{};
    T ddy{};
};

template <class T>
struct FrameT {
    T x{};
    T y{};
    T theta{};  // kept unwrapped so chained headings stay smooth
    T cos_th{};
    T sin_th{};
};

// y = sum a[j] x^j on [0, x_end], in the frame's local coordinates.
template <class T>
struct QuinticT {
    std::array<T, 6> a{};
    T x_end{};
    FrameT<T> frame{};
};

template <class T>
struct PathSampleT {
    T gx{};
    T gy{};
    T heading{};  // global, unwrapped
    T kappa{};
    T chord{};  // distance to previous sample; 0 for the first sample of a segment
};

template <class T>
struct PolyEval {
    T y{};
    T dy{};
    T ddy{};
};

template <class T>
PolyEval<T> eval_quintic(const std::array<T, 6>& a, const T& x) {
    PolyEval<T> r;
    r.y = ((((a[5] * x + a[4]) * x + a[3]) * x + a[2]) * x + a[1]) * x + a[0];
    r.dy = (((5.0 * a[5] * x + 4.0 * a[4]) * x + 3.0 * a[3]) * x + 2.0 * a[2]) * x + a[1];
    r.ddy = ((20.0 * a[5] * x + 12.0 * a[4]) * x + 6.0 * a[3]) * x + 2.0 * a[2];
    return r;
}

template <class T>
T curvature_from_derivs(const T& dy, const T& ddy) {
    using std::sqrt;
    const T one_plus = 1.0 + dy * dy;
    return ddy / (one_plus * sqrt(one_plus));
}

// Boundary conditions y(0)=0, y'(0)=0, y''(0)=start_curvature, plus the spec's
// endpoint triple. With a0=a1=0 and a2=k0/2 fixed, the remaining 3x3 system in
// scaled variables has the closed-form inverse below (determinant 2).
template <class T>
QuinticT<T> solve_segment_t(const T& start_curvature, const SegSpecT<T>& spec) {
    const double u_val = value_of(spec.x_end);
    if (!(u_val > 1e-6)) {
        throw DegenerateSegment("segment x_end " + std::to_string(u_val) + " <= 1e-6");
    }
    if (u_val < 0.1) {
        static bool warned = false;
        if (!warned) {
            warned = true;
            std::fprintf(stderr,
                         "warning: segment length %g m < 0.1 m, quintic solve is "
                         "ill-conditioned\n",
                         u_val);
        }
    }
    const T& u = spec.x_end;
    const T a2 = 0.5 * start_curvature;
    const T r1 = spec.y_end - a2 * u * u;
    const T r2 = spec.dy - 2.0 * a2 * u;
    const T r3 = spec.ddy - 2.0 * a2;
    const T u2 = u * u;
    const T u3 = u2 * u;
    const T u4 = u3 * u;
    const T u5 = u4 * u;

    QuinticT<T> seg;
    seg.a[0] = T(0.0);
    seg.a[1] = T(0.0);
    seg.a[2] = a2;
    seg.a[3] = (20.0 * r1 - 8.0 * r2 * u + r3 * u2) / (2.0 * u3);
    seg.a[4] = (-30.0 * r1 + 14.0 * r2 * u - 2.0 * r3 * u2) / (2.0 * u4);
    seg.a[5] = (12.0 * r1 - 6.0 * r2 * u + r3 * u2) / (2.0 * u5);
    seg.x_end = spec.x_end;
    return seg;
}

template <class T>
FrameT<T> make_frame(const T& x, const T& y, const T& theta) {
    using std::cos;
    using std::sin;
    FrameT<T> f;
    f.x = x;
    f.y = y;
    f.theta = theta;
    f.cos_th = cos(theta);
    f.sin_th = sin(theta);
    return f;
}

// Chains segments from an initial configuration. Frame i+1 sits at segment i's
// endpoint, rotated by atan(dy_i); its start curvature is the endpoint curvature
// computed from the spec values, which makes joints curvature-continuous by
// construction.
template <class T>
std::vector<QuinticT<T>> chain_t(const Configuration& initial, const VehicleParams& params,
                                 std::span<const SegSpecT<T>> specs) {
    std::vector<QuinticT<T>> segments;
    segments.reserve(specs.size());
    FrameT<T> frame = make_frame(T(initial.x), T(initial.y), T(initial.theta));
    T kappa = T(curvature_for_steering(initial.beta, params.wheelbase));
    for (const SegSpecT<T>& spec : specs) {
        QuinticT<T> seg = solve_segment_t(kappa, spec);
        seg.frame = frame;
        using std::atan;
        const T end_x = frame.x + frame.cos_th * spec.x_end - frame.sin_th * spec.y_end;
        const T end_y = frame.y + frame.sin_th * spec.x_end + frame.cos_th * spec.y_end;
        frame = make_frame(end_x, end_y, frame.theta + atan(spec.dy));
        kappa = curvature_from_derivs(spec.dy, spec.ddy);
        segments.push_back(std::move(seg));
    }
    return segments;
}

// 128 samples per segment, equally spaced in local x, both ends included.
template <class T>
void discretize_segment_t(const QuinticT<T>& seg,
                          std::array<PathSampleT<T>, kSamplesPerSegment>& out) {
    using std::atan;
    using std::sqrt;
    const double inv = 1.0 / (kSamplesPerSegment - 1);
    for (int j = 0; j < kSamplesPerSegment; ++j) {
        const T xl = seg.x_end * (j * inv);
        const PolyEval<T> e = eval_quintic(seg.a, xl);
        PathSampleT<T>& s = out[j];
        s.gx = seg.frame.x + seg.frame.cos_th * xl - seg.frame.sin_th * e.y;
        s.gy = seg.frame.y + seg.frame.sin_th * xl + seg.frame.cos_th * e.y;
        s.heading = seg.frame.theta + atan(e.dy);
        s.kappa = curvature_from_derivs(e.dy, e.ddy);
        if (j == 0) {
            s.chord = T(0.0);
        } else {
            const T dx = s.gx - out[j - 1].gx;
            const T dyv = s.gy - out[j - 1].gy;
            s.chord = sqrt(dx * dx + dyv * dyv);
        }
    }
}

template <class T>
std::vector<std::array<PathSampleT<T>, kSamplesPerSegment>> discretize_t(
    std::span<const QuinticT<T>> segments) {
    std::vector<std::array<PathSampleT<T>, kSamplesPerSegment>> out(segments.size());
    for (size_t i = 0; i < segments.size(); ++i) discretize_segment_t(segments[i], out[i]);
    return out;
}

}  // namespace maneuver
