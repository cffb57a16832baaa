#include "maneuver/gridmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "maneuver/errors.hpp"
#include "maneuver/image.hpp"

namespace maneuver {

std::optional<GridCell> OccupancyGrid::world_to_cell(Vec2 p) const {
    // Range-check as doubles: casting an out-of-int-range (or NaN) value is
    // undefined, and garbage poses do reach this during training.
    const double row = kAnchorRow - std::ceil(p.x / kResolution);
    const double col = kAnchorCol - std::ceil(p.y / kResolution);
    if (!(row >= 0.0) || row >= kSize || !(col >= 0.0) || col >= kSize) return std::nullopt;
    return GridCell{static_cast<int>(row), static_cast<int>(col)};
}

Vec2 OccupancyGrid::cell_center(GridCell c) const {
    return {(kAnchorRow - c.row) * kResolution - kResolution / 2.0,
            (kAnchorCol - c.col) * kResolution - kResolution / 2.0};
}

bool OccupancyGrid::is_occupied(Vec2 p) const {
    const auto cell = world_to_cell(p);
    if (!cell) return true;
    return cell_occupied(cell->row, cell->col);
}

size_t OccupancyGrid::occupied_count() const {
    return static_cast<size_t>(std::count_if(cells_.begin(), cells_.end(),
                                             [](uint8_t v) { return v != 0; }));
}

bool footprint_collides(const OccupancyGrid& grid, const Pose2& pose,
                        const VehicleParams& params) {
    const auto pts = footprint_points(pose, params);
    for (const Vec2& p : pts) {
        if (grid.is_occupied(p)) return true;
    }
    // Boundary walk matching circumference_samples(pose, params, resolution),
    // without building the vector; this runs inside planner inner loops.
    const std::array<Vec2, 4> corners = {pts[1], pts[2], pts[3], pts[4]};
    for (size_t i = 0; i < corners.size(); ++i) {
        const Vec2 a = corners[i];
        const Vec2 b = corners[(i + 1) % corners.size()];
        const double len = (b - a).norm();
        const int n = std::max(1, static_cast<int>(std::ceil(len / OccupancyGrid::kResolution)));
        for (int j = 1; j < n; ++j) {
            if (grid.is_occupied(a + (b - a) * (static_cast<double>(j) / n))) return true;
        }
    }
    return false;
}

namespace {

struct ObstacleRect {
    Vec2 center;
    Vec2 axis;  // unit vector of the first side
    double hx = 0.0;
    double hy = 0.0;

    std::array<Vec2, 4> corners() const {
        const Vec2 u = axis * hx;
        const Vec2 v = Vec2{-axis.y, axis.x} * hy;
        return {center + u + v, center + u - v, center - u - v, center - u + v};
    }

    bool contains(Vec2 p) const {
        const Vec2 d = p - center;
        const double lx = d.dot(axis);
        const double ly = d.dot({-axis.y, axis.x});
        return std::abs(lx) <= hx && std::abs(ly) <= hy;
    }
};

// Separating-axis test over both rectangles' edge normals.
bool rects_overlap(const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b) {
    const std::array<const std::array<Vec2, 4>*, 2> polys = {&a, &b};
    for (const auto* poly : polys) {
        for (int i = 0; i < 4; ++i) {
            const Vec2 e = (*poly)[(i + 1) % 4] - (*poly)[i];
            const Vec2 n = {-e.y, e.x};
            double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
            for (const Vec2& p : a) {
                const double t = p.dot(n);
                amin = std::min(amin, t);
                amax = std::max(amax, t);
            }
            for (const Vec2& p : b) {
                const double t = p.dot(n);
                bmin = std::min(bmin, t);
                bmax = std::max(bmax, t);
            }
            if (amax < bmin || bmax < amin) return false;  // gap on this axis
        }
    }
    return true;
}

}  // namespace

OccupancyGrid add_random_obstacles(const OccupancyGrid& grid, int count, uint64_t seed,
                                   const VehicleParams& params, const Pose2& initial) {
    OccupancyGrid out = grid;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-1.6, 24.0);
    std::uniform_real_distribution<double> uy(-12.8, 12.8);
    std::uniform_real_distribution<double> uangle(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> uside(0.4, 3.0);

    // Inflate the keep-out rectangle by one cell diagonal: occupancy is
    // rasterized by cell center, so a rectangle merely disjoint from the body
    // could still mark a cell that overlaps it.
    VehicleParams inflated = params;
    inflated.front_overhang += 0.15;
    inflated.rear_overhang += 0.15;
    inflated.width += 0.3;
    const auto fp = footprint_points(initial, inflated);
    const std::array<Vec2, 4> vehicle = {fp[1], fp[2], fp[3], fp[4]};

    for (int i = 0; i < count; ++i) {
        ObstacleRect rect;
        bool placed = false;
        for (int attempt = 0; attempt < 100; ++attempt) {
            rect.center = {ux(rng), uy(rng)};
            const double a = uangle(rng);
            rect.axis = {std::cos(a), std::sin(a)};
            rect.hx = uside(rng) / 2.0;
            rect.hy = uside(rng) / 2.0;
            if (!rects_overlap(rect.corners(), vehicle)) {
                placed = true;
                break;
            }
        }
        if (!placed) continue;

        const auto cs = rect.corners();
        double xmin = cs[0].x, xmax = cs[0].x, ymin = cs[0].y, ymax = cs[0].y;
        for (const Vec2& c : cs) {
            xmin = std::min(xmin, c.x);
            xmax = std::max(xmax, c.x);
            ymin = std::min(ymin, c.y);
            ymax = std::max(ymax, c.y);
        }
        // Occupy every cell whose center falls inside the rectangle; thin
        // rectangles that straddle no center still mark their center cell.
        bool any = false;
        for (double x = xmin; x <= xmax + OccupancyGrid::kResolution;
             x += OccupancyGrid::kResolution) {
            for (double y = ymin; y <= ymax + OccupancyGrid::kResolution;
                 y += OccupancyGrid::kResolution) {
                const auto cell = out.world_to_cell({x, y});
                if (!cell) continue;
                if (rect.contains(out.cell_center(*cell))) {
                    out.set_cell(cell->row, cell->col, true);
                    any = true;
                }
            }
        }
        if (!any) {
            const auto cell = out.world_to_cell(rect.center);
            if (cell) out.set_cell(cell->row, cell->col, true);
        }
    }
    return out;
}

double distance_to_polyline(Vec2 p, std::span<const Vec2> polyline) {
    return polyline_distance(p, polyline);
}

OccupancyGrid load_grid(const std::string& path) {
    const GrayImage img = load_image(path);
    if (img.width != OccupancyGrid::kSize || img.height != OccupancyGrid::kSize) {
        throw MapLoadError("map must be 128x128, got " + std::to_string(img.width) + "x" +
                           std::to_string(img.height) + ": " + path);
    }
    OccupancyGrid grid;
    for (int r = 0; r < OccupancyGrid::kSize; ++r) {
        for (int c = 0; c < OccupancyGrid::kSize; ++c) {
            grid.set_cell(r, c, img.pixels[r * OccupancyGrid::kSize + c] < 128);
        }
    }
    return grid;
}

void save_grid(const std::string& path, const OccupancyGrid& grid) {
    GrayImage img;
    img.width = OccupancyGrid::kSize;
    img.height = OccupancyGrid::kSize;
    img.pixels.resize(size_t(img.width) * img.height);
    for (int r = 0; r < OccupancyGrid::kSize; ++r) {
        for (int c = 0; c < OccupancyGrid::kSize; ++c) {
            img.pixels[r * OccupancyGrid::kSize + c] = grid.cell_occupied(r, c) ? 0 : 255;
        }
    }
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".png") {
        save_png(path, img);
    } else {
        save_pgm(path, img);
    }
}

}  // namespace maneuver
