#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "maneuver/errors.hpp"
#include "maneuver/geometry.hpp"
#include "maneuver/gridmap.hpp"
#include "maneuver/image.hpp"
#include "maneuver/vehicle.hpp"
#include "testutil.hpp"

using namespace maneuver;
constexpr double kPi = std::numbers::pi;

TEST_CASE("wrap_angle lands in (-pi, pi]") {
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(2.0 * kPi) == doctest::Approx(0.0));
    CHECK(wrap_angle(0.3) == doctest::Approx(0.3));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 500; ++i) {
        const double a = u(rng);
        const double w = wrap_angle(a);
        CHECK(w > -kPi);
        CHECK(w <= kPi);
        // same angle modulo 2*pi
        CHECK(std::abs(std::remainder(a - w, 2.0 * kPi)) < 1e-9);
    }
}

TEST_CASE("compose and to_local invert each other") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        const Pose2 frame{u(rng), u(rng), u(rng)};
        const Pose2 local{u(rng), u(rng), u(rng)};
        const Pose2 global = compose(frame, local);
        const Pose2 back = to_local(frame, global);
        CHECK(back.x == doctest::Approx(local.x).epsilon(1e-9));
        CHECK(back.y == doctest::Approx(local.y).epsilon(1e-9));
        CHECK(std::abs(wrap_angle(back.theta - local.theta)) < 1e-9);
    }
}

TEST_CASE("polyline distance matches dense point sampling") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Vec2> poly;
        const int n = 2 + static_cast<int>(rng() % 5);
        for (int i = 0; i < n; ++i) poly.push_back({u(rng), u(rng)});
        const Vec2 p{u(rng), u(rng)};

        double brute = 1e300;
        for (size_t i = 0; i + 1 < poly.size(); ++i) {
            for (int k = 0; k <= 2000; ++k) {
                const Vec2 q = poly[i] + (poly[i + 1] - poly[i]) * (k / 2000.0);
                brute = std::min(brute, (p - q).norm());
            }
        }
        CHECK(polyline_distance(p, poly) == doctest::Approx(brute).epsilon(1e-5));
    }
    // single vertex degenerates to point distance
    const std::vector<Vec2> one = {{1.0, 2.0}};
    CHECK(polyline_distance({4.0, 6.0}, one) == doctest::Approx(5.0));
}

TEST_CASE("steering/curvature conversions round-trip and enforce the limit") {
    const VehicleParams params = kia_rio();
    CHECK(curvature_limit(params) == doctest::Approx(std::tan(0.57) / 2.8));
    for (double beta : {-0.5, -0.2, 0.0, 0.3, 0.57}) {
        const double kappa = curvature_for_steering(beta, params.wheelbase);
        CHECK(steering_for_curvature(kappa, params) == doctest::Approx(beta).epsilon(1e-12));
    }
    CHECK_THROWS_AS(steering_for_curvature(curvature_limit(params) + 1e-6, params),
                    CurvatureExceeded);
    CHECK_THROWS_AS(steering_for_curvature(-curvature_limit(params) - 1e-6, params),
                    CurvatureExceeded);
}

TEST_CASE("footprint points sit at the body rectangle corners") {
    const VehicleParams params = kia_rio();
    const Pose2 pose{3.0, -2.0, 0.7};
    const auto pts = footprint_points(pose, params);
    CHECK(pts[0].x == doctest::Approx(pose.x));
    CHECK(pts[0].y == doctest::Approx(pose.y));
    const double c = std::cos(pose.theta), s = std::sin(pose.theta);
    const auto body = footprint_body_offsets(params);
    for (int i = 0; i < 5; ++i) {
        CHECK(pts[i].x == doctest::Approx(pose.x + c * body[i].x - s * body[i].y));
        CHECK(pts[i].y == doctest::Approx(pose.y + s * body[i].x + c * body[i].y));
    }
    // front-left/front-right pair spans the width
    CHECK((pts[1] - pts[2]).norm() == doctest::Approx(params.width));
    CHECK((pts[1] - pts[4]).norm() == doctest::Approx(params.body_length()));
}

TEST_CASE("circumference samples stay on the boundary with bounded spacing") {
    const VehicleParams params = kia_rio();
    const Pose2 pose{1.0, 2.0, -0.4};
    const double spacing = 0.15;
    const auto samples = circumference_samples(pose, params, spacing);
    const auto pts = footprint_points(pose, params);
    const std::vector<Vec2> ring = {pts[1], pts[2], pts[3], pts[4], pts[1]};
    for (const Vec2& p : samples) {
        CHECK(polyline_distance(p, ring) < 1e-9);
    }
    for (size_t i = 0; i + 1 < samples.size(); ++i) {
        CHECK((samples[i + 1] - samples[i]).norm() <= spacing + 1e-9);
    }
    // all four corners present
    for (int c = 1; c <= 4; ++c) {
        double best = 1e300;
        for (const Vec2& p : samples) best = std::min(best, (p - pts[c]).norm());
        CHECK(best < 1e-9);
    }
}

TEST_CASE("grid cell mapping matches the documented extent") {
    OccupancyGrid grid;
    const auto at = [&](double x, double y) { return grid.world_to_cell({x, y}); };
    REQUIRE(at(0.0, 0.0).has_value());
    CHECK(*at(0.0, 0.0) == GridCell{120, 64});
    CHECK(*at(0.1, 0.0) == GridCell{119, 64});
    CHECK(*at(24.0, 0.0) == GridCell{0, 64});
    CHECK(*at(0.0, 12.8) == GridCell{120, 0});
    CHECK(*at(0.0, -12.79) == GridCell{120, 127});
    CHECK_FALSE(at(24.01, 0.0).has_value());
    CHECK_FALSE(at(-1.6, 0.0).has_value());
    CHECK_FALSE(at(0.0, 12.81).has_value());
    CHECK_FALSE(at(0.0, -12.8).has_value());
    // hardened against values that do not fit an int
    CHECK_FALSE(at(1e200, 0.0).has_value());
    CHECK_FALSE(at(std::nan(""), 0.0).has_value());

    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
        const GridCell c{static_cast<int>(rng() % 128), static_cast<int>(rng() % 128)};
        const auto back = grid.world_to_cell(grid.cell_center(c));
        REQUIRE(back.has_value());
        CHECK(*back == c);
    }
}

TEST_CASE("out-of-bounds points count as occupied") {
    OccupancyGrid grid;
    CHECK(grid.is_occupied({25.0, 0.0}));
    CHECK(grid.is_occupied({-2.0, 0.0}));
    CHECK(grid.is_occupied({0.0, 13.0}));
    CHECK_FALSE(grid.is_occupied({5.0, 0.0}));
    grid.set_cell(100, 64, true);
    CHECK(grid.is_occupied(grid.cell_center({100, 64})));
    CHECK(grid.occupied_count() == 1);
}

TEST_CASE("footprint collision reacts to cells under the body") {
    const VehicleParams params = kia_rio();
    OccupancyGrid grid;
    const Pose2 pose{5.0, 0.0, 0.0};
    CHECK_FALSE(footprint_collides(grid, pose, params));
    // cell at the guiding point
    auto cell = grid.world_to_cell({5.0, 0.0});
    REQUIRE(cell.has_value());
    grid.set_cell(cell->row, cell->col, true);
    CHECK(footprint_collides(grid, pose, params));
    grid.set_cell(cell->row, cell->col, false);
    // cell at the front-left corner
    const auto pts = footprint_points(pose, params);
    cell = grid.world_to_cell(pts[1]);
    REQUIRE(cell.has_value());
    grid.set_cell(cell->row, cell->col, true);
    CHECK(footprint_collides(grid, pose, params));
    grid.set_cell(cell->row, cell->col, false);
    // far away cell
    cell = grid.world_to_cell({20.0, 10.0});
    grid.set_cell(cell->row, cell->col, true);
    CHECK_FALSE(footprint_collides(grid, pose, params));
    // a pose that pokes out of the map collides with the boundary
    CHECK(footprint_collides(OccupancyGrid{}, Pose2{23.5, 0.0, 0.0}, params));
}

TEST_CASE("random obstacles are deterministic and avoid the start footprint") {
    const VehicleParams params = kia_rio();
    const Pose2 start{0.0, 0.0, 0.0};
    const OccupancyGrid a = add_random_obstacles(OccupancyGrid{}, 8, 42, params, start);
    const OccupancyGrid b = add_random_obstacles(OccupancyGrid{}, 8, 42, params, start);
    CHECK(a.cells() == b.cells());
    CHECK(a.occupied_count() > 0);
    const OccupancyGrid c = add_random_obstacles(OccupancyGrid{}, 8, 43, params, start);
    CHECK(a.cells() != c.cells());
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        const OccupancyGrid g = add_random_obstacles(OccupancyGrid{}, 12, seed, params, start);
        CHECK_FALSE(footprint_collides(g, start, params));
    }
    CHECK(add_random_obstacles(OccupancyGrid{}, 0, 1, params, start).occupied_count() == 0);
}

TEST_CASE("pgm and png round-trips preserve pixels") {
    testutil::TempDir tmp("imgio");
    GrayImage img;
    img.width = 128;
    img.height = 128;
    img.pixels.resize(128 * 128);
    std::mt19937_64 rng(17);
    for (auto& p : img.pixels) p = static_cast<uint8_t>(rng() % 256);

    save_pgm(tmp.file("a.pgm"), img);
    const GrayImage pgm = load_image(tmp.file("a.pgm"));
    CHECK(pgm.width == 128);
    CHECK(pgm.height == 128);
    CHECK(pgm.pixels == img.pixels);

    save_png(tmp.file("a.png"), img);
    const GrayImage png = load_image(tmp.file("a.png"));
    CHECK(png.width == 128);
    CHECK(png.height == 128);
    CHECK(png.pixels == img.pixels);
}

TEST_CASE("rgb png loads as averaged gray") {
    testutil::TempDir tmp("imgrgb");
    RgbImage img;
    img.width = 4;
    img.height = 2;
    img.fill(255, 255, 255);
    img.set(1, 0, 255, 0, 0);    // avg 85
    img.set(2, 1, 10, 20, 33);   // avg 21
    save_png(tmp.file("rgb.png"), img);
    const GrayImage gray = load_image(tmp.file("rgb.png"));
    REQUIRE(gray.width == 4);
    REQUIRE(gray.height == 2);
    CHECK(gray.pixels[0 * 4 + 1] == 85);
    CHECK(gray.pixels[1 * 4 + 2] == 21);
    CHECK(gray.pixels[0] == 255);
}

TEST_CASE("externally produced pngs load with the occupancy threshold") {
    const GrayImage g = load_image(testutil::data_file("pillow_gray.png"));
    REQUIRE(g.width == 128);
    REQUIRE(g.height == 128);
    CHECK(g.pixels[15 * 128 + 35] == 0);
    CHECK(g.pixels[50 * 128 + 60] == 127);
    CHECK(g.pixels[51 * 128 + 60] == 128);

    const OccupancyGrid grid = load_grid(testutil::data_file("pillow_gray.png"));
    CHECK(grid.cell_occupied(15, 35));
    CHECK(grid.cell_occupied(50, 60));   // 127 < 128: occupied
    CHECK_FALSE(grid.cell_occupied(51, 60));
    CHECK_FALSE(grid.cell_occupied(100, 100));

    const OccupancyGrid rgb = load_grid(testutil::data_file("pillow_rgb.png"));
    CHECK(rgb.cell_occupied(75, 25));    // red block averages to 85
    CHECK_FALSE(rgb.cell_occupied(92, 92));  // light gray block averages to 170
}

TEST_CASE("map loading rejects bad inputs") {
    CHECK_THROWS_AS(load_image("/nonexistent/nope.png"), MapLoadError);
    CHECK_THROWS_AS(load_image(testutil::data_file("pillow_16bit.png")), MapLoadError);
    CHECK_THROWS_AS(load_grid(testutil::data_file("pillow_small.png")), MapLoadError);
    testutil::TempDir tmp("badimg");
    std::ofstream(tmp.file("junk.png")) << "this is not a png";
    CHECK_THROWS_AS(load_image(tmp.file("junk.png")), MapLoadError);
}

TEST_CASE("grid image round-trip preserves occupancy") {
    testutil::TempDir tmp("gridio");
    const OccupancyGrid grid =
        add_random_obstacles(OccupancyGrid{}, 10, 23, kia_rio(), Pose2{});
    save_grid(tmp.file("m.png"), grid);
    CHECK(load_grid(tmp.file("m.png")).cells() == grid.cells());
    save_grid(tmp.file("m.pgm"), grid);
    CHECK(load_grid(tmp.file("m.pgm")).cells() == grid.cells());
}
