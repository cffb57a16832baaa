#include "maneuver/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "maneuver/errors.hpp"
#include "maneuver/image.hpp"
#include "maneuver/losscalc.hpp"

namespace maneuver {

namespace {

constexpr int kSide = OccupancyGrid::kSize * kRenderScale;

struct PixelPos {
    int x = 0;
    int y = 0;
};

// Cell (r, c) covers output rows r*scale .. r*scale+scale-1, so the
// fractional grid coordinate scales directly into pixels.
PixelPos to_pixel(Vec2 p) {
    const double rf = OccupancyGrid::kAnchorRow - p.x / OccupancyGrid::kResolution;
    const double cf = OccupancyGrid::kAnchorCol - p.y / OccupancyGrid::kResolution;
    return {static_cast<int>(std::floor(cf * kRenderScale)),
            static_cast<int>(std::floor(rf * kRenderScale))};
}

RgbImage base_image(const OccupancyGrid& grid) {
    RgbImage img;
    img.width = kSide;
    img.height = kSide;
    img.fill(255, 255, 255);
    for (int r = 0; r < OccupancyGrid::kSize; ++r) {
        for (int c = 0; c < OccupancyGrid::kSize; ++c) {
            if (!grid.cell_occupied(r, c)) continue;
            for (int dy = 0; dy < kRenderScale; ++dy) {
                for (int dx = 0; dx < kRenderScale; ++dx) {
                    img.set(c * kRenderScale + dx, r * kRenderScale + dy, 0, 0, 0);
                }
            }
        }
    }
    return img;
}

void draw_line(RgbImage& img, PixelPos a, PixelPos b, const uint8_t rgb[3]) {
    const int steps = std::max({std::abs(b.x - a.x), std::abs(b.y - a.y), 1});
    for (int i = 0; i <= steps; ++i) {
        img.set(a.x + (b.x - a.x) * i / steps, a.y + (b.y - a.y) * i / steps, rgb[0],
                rgb[1], rgb[2]);
    }
}

}  // namespace

void render_path_png(const std::string& path, const OccupancyGrid& grid,
                     const DiscretizedPath& d, const VehicleParams& params) {
    RgbImage img = base_image(grid);
    const auto body = footprint_body_offsets(params);
    static constexpr uint8_t kColors[5][3] = {
        {220, 40, 40},   // guiding point
        {40, 160, 40},   // front-left
        {40, 90, 220},   // front-right
        {230, 150, 30},  // rear-right
        {160, 40, 200},  // rear-left
    };
    for (int k = 0; k < 5; ++k) {
        PixelPos prev{};
        bool has_prev = false;
        for (const auto& seg : d.segments) {
            for (const PathSample& s : seg) {
                const double c = std::cos(s.heading);
                const double sn = std::sin(s.heading);
                const PixelPos px = to_pixel({s.gx + c * body[k].x - sn * body[k].y,
                                              s.gy + sn * body[k].x + c * body[k].y});
                if (has_prev) {
                    draw_line(img, prev, px, kColors[k]);
                } else {
                    img.set(px.x, px.y, kColors[k][0], kColors[k][1], kColors[k][2]);
                }
                prev = px;
                has_prev = true;
            }
        }
    }
    save_png(path, img);
}

ReachableResult compute_reachable(const PolicyNet& net, const OccupancyGrid& grid,
                                  const VehicleParams& params, const Configuration& q0,
                                  const ReachableOptions& options) {
    if (options.headings < 1 || !(options.grid_step > 0.0) || options.n_segments < 1) {
        throw Error("bad reachable options");
    }
    ReachableResult res;
    MapActivations map;
    net.map_forward(grid, map);
    PolicyWorkspace ws;
    const LossOptions lopt;
    std::vector<Vec2> poly;

    // In-bounds world extent is x in (-1.6, 24.0], y in (-12.8, 12.8].
    for (double gx = -1.0; gx <= 24.0 + 1e-9; gx += options.grid_step) {
        for (double gy = -12.0; gy <= 12.0 + 1e-9; gy += options.grid_step) {
            if (grid.is_occupied({gx, gy})) continue;
            int feas = 0;
            for (int h = 0; h < options.headings; ++h) {
                GoalRegion goal;
                goal.x = gx;
                goal.y = gy;
                goal.theta = -std::numbers::pi / 2.0 +
                             (h + 0.5) * std::numbers::pi / options.headings;
                ++res.rollouts;
                try {
                    const RolloutResult roll =
                        rollout(net, map, params, q0, goal, options.n_segments, &ws);
                    const DiscretizedPath d = discretize(roll.path);
                    poly.clear();
                    for (const auto& seg : d.segments) {
                        for (const PathSample& s : seg) poly.push_back({s.gx, s.gy});
                    }
                    const LossTermsT<double> terms =
                        loss_terms_t<double>(d.segments, grid, params, poly, goal, lopt);
                    if (terms.feasible) {
                        ++feas;
                        ++res.feasible;
                    }
                } catch (const Error&) {
                    // a degenerate rollout counts as infeasible
                }
            }
            res.goals.push_back({gx, gy});
            res.fraction.push_back(static_cast<double>(feas) / options.headings);
        }
    }
    return res;
}

void render_reachable_png(const std::string& path, const OccupancyGrid& grid,
                          const ReachableResult& r) {
    RgbImage img = base_image(grid);
    const int rad = kRenderScale;
    for (size_t i = 0; i < r.goals.size(); ++i) {
        if (r.fraction[i] <= 0.0) continue;
        const PixelPos c = to_pixel(r.goals[i]);
        const uint8_t lvl = static_cast<uint8_t>(std::lround(255.0 * (1.0 - r.fraction[i])));
        for (int dy = -rad; dy <= rad; ++dy) {
            for (int dx = -rad; dx <= rad; ++dx) {
                if (dx * dx + dy * dy <= rad * rad) img.set(c.x + dx, c.y + dy, lvl, lvl, 255);
            }
        }
    }
    save_png(path, img);
}

}  // namespace maneuver
