#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maneuver/geometry.hpp"
#include "maneuver/vehicle.hpp"

namespace maneuver {

struct GridCell {
    int row = 0;
    int col = 0;
    bool operator==(const GridCell&) const = default;
};

// 128x128 occupancy grid, 0.2 m cells. The world origin sits at (row 120,
// col 64); +x runs toward decreasing rows, +y toward decreasing columns, so
// the in-bounds world extent is x in (-1.6, 24.0], y in (-12.8, 12.8].
class OccupancyGrid {
  public:
    static constexpr int kSize = 128;
    static constexpr double kResolution = 0.2;
    static constexpr int kAnchorRow = 120;
    static constexpr int kAnchorCol = 64;

    OccupancyGrid() : cells_(kSize * kSize, 0) {}

    bool cell_occupied(int row, int col) const { return cells_[row * kSize + col] != 0; }
    void set_cell(int row, int col, bool occupied) {
        cells_[row * kSize + col] = occupied ? 1 : 0;
    }

    std::optional<GridCell> world_to_cell(Vec2 p) const;
    Vec2 cell_center(GridCell c) const;

    // Out-of-bounds points count as occupied.
    bool is_occupied(Vec2 p) const;

    size_t occupied_count() const;
    const std::vector<uint8_t>& cells() const { return cells_; }

  private:
    std::vector<uint8_t> cells_;
};

bool footprint_collides(const OccupancyGrid& grid, const Pose2& pose,
                        const VehicleParams& params);

// Adds up to `count` rotated rectangles (sides uniform in [0.4, 3.0] m) that
// avoid the vehicle's footprint at `initial`. Deterministic per seed.
OccupancyGrid add_random_obstacles(const OccupancyGrid& grid, int count, uint64_t seed,
                                   const VehicleParams& params,
                                   const Pose2& initial = Pose2{});

double distance_to_polyline(Vec2 p, std::span<const Vec2> polyline);

// Image IO: 8-bit PGM/PNG, 128x128, pixel < 128 means occupied.
// Row 0 of the image is grid row 0. Throws MapLoadError.
OccupancyGrid load_grid(const std::string& path);
void save_grid(const std::string& path, const OccupancyGrid& grid);  // by extension

}  // namespace maneuver
