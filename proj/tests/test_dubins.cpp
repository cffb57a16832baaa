#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "maneuver/dubins.hpp"

using namespace maneuver;
constexpr double kPi = std::numbers::pi;

namespace {

Vec2 turn_center(const Pose2& p, double s, double rho) {
    return {p.x - s * rho * std::sin(p.theta), p.y + s * rho * std::cos(p.theta)};
}

double mod2pi(double x) {
    double r = std::fmod(x, 2.0 * kPi);
    if (r < 0.0) r += 2.0 * kPi;
    if (r > 2.0 * kPi - 1e-9) r = 0.0;
    return r;
}

// Brute-force arc-straight-arc oracle: sweep the first arc angle densely,
// root-find the tangency condition against the goal circle, and keep the
// shortest candidate. Exact for pose pairs far enough apart that no
// three-arc solution can win (center distance > 4 rho suffices; we use
// endpoint distance > 6 rho where three-arc paths do not even exist).
double oracle_csc(const Pose2& from, const Pose2& to, double rho) {
    double best = 1e300;
    for (const double s1 : {1.0, -1.0}) {
        for (const double s3 : {1.0, -1.0}) {
            const Vec2 c1 = turn_center(from, s1, rho);
            const Vec2 c3 = turn_center(to, s3, rho);
            const auto residual = [&](double phi) {
                const double th = from.theta + s1 * phi;
                const Vec2 m{c1.x + s1 * rho * std::sin(th), c1.y - s1 * rho * std::cos(th)};
                const Vec2 n{-std::sin(th), std::cos(th)};
                return (c3 - m).dot(n) - s3 * rho;
            };
            const auto candidate = [&](double phi) {
                const double th = from.theta + s1 * phi;
                const Vec2 m{c1.x + s1 * rho * std::sin(th), c1.y - s1 * rho * std::cos(th)};
                const Vec2 dir{std::cos(th), std::sin(th)};
                const double t = (c3 - m).dot(dir);
                if (t < -1e-9) return;
                const double phi3 = mod2pi(s3 * (to.theta - th));
                const double len = rho * phi + std::max(0.0, t) + rho * phi3;
                best = std::min(best, len);
            };
            const int n = 4096;
            double prev_phi = 0.0;
            double prev_res = residual(0.0);
            if (std::abs(prev_res) < 1e-12) candidate(0.0);
            for (int i = 1; i <= n; ++i) {
                const double phi = 2.0 * kPi * i / n;
                const double res = residual(phi);
                if (res == 0.0 || prev_res * res < 0.0) {
                    double lo = prev_phi, hi = phi, flo = prev_res;
                    for (int it = 0; it < 80; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        const double fm = residual(mid);
                        if (flo * fm <= 0.0) {
                            hi = mid;
                        } else {
                            lo = mid;
                            flo = fm;
                        }
                    }
                    candidate(0.5 * (lo + hi));
                }
                prev_phi = phi;
                prev_res = res;
            }
        }
    }
    return best;
}

}  // namespace

TEST_CASE("exact values at canonical poses") {
    CHECK(dubins_distance({0, 0, 0}, {0, 0, 0}, 1.0) == doctest::Approx(0.0));
    CHECK(dubins_distance({2, 3, 0.7}, {2, 3, 0.7}, 4.0) == doctest::Approx(0.0));
    CHECK(dubins_distance({0, 0, 0}, {10, 0, 0}, 4.4) == doctest::Approx(10.0));
    // half-turn onto the opposite lane: a single pi arc
    const double rho = 2.5;
    CHECK(dubins_distance({0, 0, 0}, {0, 2 * rho, kPi}, rho) == doctest::Approx(kPi * rho));
}

TEST_CASE("distance scales with the turning radius") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-20.0, 20.0), ua(-kPi, kPi);
    for (int i = 0; i < 50; ++i) {
        const Pose2 a{u(rng), u(rng), ua(rng)};
        const Pose2 b{u(rng), u(rng), ua(rng)};
        const double rho = 2.0;
        const Pose2 as{a.x / rho, a.y / rho, a.theta};
        const Pose2 bs{b.x / rho, b.y / rho, b.theta};
        CHECK(dubins_distance(a, b, rho) ==
              doctest::Approx(rho * dubins_distance(as, bs, 1.0)).epsilon(1e-9));
    }
}

TEST_CASE("mirror and reversal symmetries hold") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-15.0, 15.0), ua(-kPi, kPi);
    for (int i = 0; i < 100; ++i) {
        const Pose2 a{u(rng), u(rng), ua(rng)};
        const Pose2 b{u(rng), u(rng), ua(rng)};
        const double rho = 1.5;
        const double d = dubins_distance(a, b, rho);
        // mirror across the x axis
        const Pose2 am{a.x, -a.y, -a.theta};
        const Pose2 bm{b.x, -b.y, -b.theta};
        CHECK(dubins_distance(am, bm, rho) == doctest::Approx(d).epsilon(1e-9));
        // traverse the path backwards with flipped headings
        const Pose2 ar{a.x, a.y, a.theta + kPi};
        const Pose2 br{b.x, b.y, b.theta + kPi};
        CHECK(dubins_distance(br, ar, rho) == doctest::Approx(d).epsilon(1e-9));
    }
}

TEST_CASE("triangle inequality holds on random triples") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-15.0, 15.0), ua(-kPi, kPi);
    for (int i = 0; i < 100; ++i) {
        const Pose2 a{u(rng), u(rng), ua(rng)};
        const Pose2 b{u(rng), u(rng), ua(rng)};
        const Pose2 c{u(rng), u(rng), ua(rng)};
        const double rho = 1.0;
        CHECK(dubins_distance(a, c, rho) <=
              dubins_distance(a, b, rho) + dubins_distance(b, c, rho) + 1e-9);
    }
}

TEST_CASE("matches the dense-sampling oracle on separated poses") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> ua(-kPi, kPi);
    std::uniform_real_distribution<double> ur(6.6, 24.0);
    const double rho = 1.0;
    for (int i = 0; i < 60; ++i) {
        const Pose2 a{0.0, 0.0, ua(rng)};
        const double bearing = ua(rng);
        const double dist = ur(rng);
        const Pose2 b{dist * std::cos(bearing), dist * std::sin(bearing), ua(rng)};
        const double ours = dubins_distance(a, b, rho);
        const double oracle = oracle_csc(a, b, rho);
        CHECK(ours == doctest::Approx(oracle).epsilon(1e-4));
        // any pose-to-pose path is at least as long as the straight line
        CHECK(ours >= (Vec2{b.x - a.x, b.y - a.y}).norm() - 1e-9);
    }
}
