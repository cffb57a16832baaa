#include "maneuver/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>

#include "maneuver/dubins.hpp"
#include "maneuver/errors.hpp"

namespace maneuver {

namespace {

struct TemplateSweep {
    std::array<PathSample, kSamplesPerSegment> samples;  // node-local frame
};

double sweep_length(const std::array<PathSample, kSamplesPerSegment>& s) {
    double sum = 0.0;
    for (const PathSample& p : s) sum += p.chord;
    return sum;
}

double sweep_peak_kappa(const std::array<PathSample, kSamplesPerSegment>& s) {
    double m = 0.0;
    for (const PathSample& p : s) m = std::max(m, std::abs(p.kappa));
    return m;
}

std::array<PathSample, kSamplesPerSegment> discretize_spec(double start_curvature,
                                                           const SegmentSpec& spec) {
    QuinticSegment seg = solve_segment(start_curvature, spec);
    seg.frame = make_frame(0.0, 0.0, 0.0);
    std::array<PathSample, kSamplesPerSegment> out;
    discretize_segment_t<double>(seg, out);
    return out;
}

// Largest m in (0, 1] such that the primitive scaled by m keeps its peak
// curvature under the cap; candidates are generated slightly above the limit
// on purpose so the top magnitudes land near it.
SegmentSpec calibrate(double u, double psi, double offset, double kappa_cap) {
    const auto make = [&](double m) {
        SegmentSpec s;
        s.x_end = u;
        s.y_end = u * std::tan(m * psi / 2.0) + m * offset;
        s.dy = std::tan(m * psi);
        s.ddy = 0.0;
        return s;
    };
    double m = 1.0;
    if (sweep_peak_kappa(discretize_spec(0.0, make(1.0))) <= kappa_cap) return make(1.0);
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 40; ++it) {
        m = 0.5 * (lo + hi);
        if (sweep_peak_kappa(discretize_spec(0.0, make(m))) <= kappa_cap) {
            lo = m;
        } else {
            hi = m;
        }
    }
    return make(lo);
}

MotionPrimitive finalize(const SegmentSpec& spec) {
    MotionPrimitive p;
    p.spec = spec;
    const auto sweep = discretize_spec(0.0, spec);
    p.length = sweep_length(sweep);
    p.max_abs_kappa = sweep_peak_kappa(sweep);
    p.end_offset = {spec.x_end, spec.y_end, std::atan(spec.dy)};
    p.end_curvature = 0.0;  // ddy = 0
    return p;
}

MotionPrimitive mirrored(const MotionPrimitive& p) {
    MotionPrimitive m = p;
    m.spec.y_end = -p.spec.y_end;
    m.spec.dy = -p.spec.dy;
    m.spec.ddy = -p.spec.ddy;
    m.end_offset = {p.end_offset.x, -p.end_offset.y, -p.end_offset.theta};
    return m;
}

// Exact squared Euclidean distance transform (one-dimensional pass).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, int n) {
    static constexpr double kInf = 1e18;
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        d[q] = (q - v[k]) * (q - v[k]) + f[v[k]];
    }
}

// Distance (meters) from each cell center to the nearest occupied cell center.
std::vector<double> distance_field(const OccupancyGrid& grid) {
    constexpr int n = OccupancyGrid::kSize;
    std::vector<double> d2(n * n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            d2[r * n + c] = grid.cell_occupied(r, c) ? 0.0 : 1e18;
        }
    }
    std::vector<double> col(n), out(n);
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < n; ++r) col[r] = d2[r * n + c];
        edt_1d(col, out, n);
        for (int r = 0; r < n; ++r) d2[r * n + c] = out[r];
    }
    std::vector<double> row(n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) row[c] = d2[r * n + c];
        edt_1d(row, out, n);
        for (int c = 0; c < n; ++c) d2[r * n + c] = out[c];
    }
    for (double& v : d2) v = std::sqrt(v) * OccupancyGrid::kResolution;
    return d2;
}

class CollisionChecker {
  public:
    CollisionChecker(const OccupancyGrid& grid, const VehicleParams& params)
        : grid_(grid),
          params_(params),
          field_(distance_field(grid)),
          center_offset_((params.front_overhang - params.rear_overhang) / 2.0),
          radius_(std::hypot((params.front_overhang + params.rear_overhang) / 2.0,
                             params.width / 2.0)) {}

    bool collides(const Pose2& pose) const {
        const Vec2 center{pose.x + std::cos(pose.theta) * center_offset_,
                          pose.y + std::sin(pose.theta) * center_offset_};
        const auto cell = grid_.world_to_cell(center);
        if (cell) {
            // Map-edge margin keeps every sample in bounds; the field margin
            // (two half cell diagonals) keeps every sample off occupied cells.
            const double edge =
                std::min(std::min(center.x + 1.6, 24.0 - center.x),
                         std::min(center.y + 12.8, 12.8 - center.y));
            const double clearance =
                field_[cell->row * OccupancyGrid::kSize + cell->col] - 0.2829;
            if (edge > radius_ && clearance > radius_) return false;
        }
        return footprint_collides(grid_, pose, params_);
    }

    // True if any sample pose along a local-frame sweep collides.
    bool sweep_collides(const Pose2& base,
                        const std::array<PathSample, kSamplesPerSegment>& sweep) const {
        const double c = std::cos(base.theta);
        const double s = std::sin(base.theta);
        for (const PathSample& p : sweep) {
            const Pose2 pose{base.x + c * p.gx - s * p.gy, base.y + s * p.gx + c * p.gy,
                             base.theta + p.heading};
            if (collides(pose)) return true;
        }
        return false;
    }

  private:
    const OccupancyGrid& grid_;
    const VehicleParams& params_;
    std::vector<double> field_;
    double center_offset_;
    double radius_;
};

uint64_t bin_key(const Pose2& p) {
    const auto q = [](double v, double res) {
        return static_cast<int64_t>(std::floor(v / res));
    };
    const uint64_t ix = static_cast<uint64_t>(q(p.x, 0.1) + 512) & 0xFFFFF;
    const uint64_t iy = static_cast<uint64_t>(q(p.y, 0.1) + 512) & 0xFFFFF;
    const uint64_t it = static_cast<uint64_t>(q(wrap_angle(p.theta), 0.05) + 512) & 0xFFFFF;
    return (ix << 40) | (iy << 20) | it;
}

struct Node {
    Pose2 pose;
    double g = 0.0;
    int parent = -1;
    int prim = -1;  // index into the expansion set that led here
};

struct OpenEntry {
    double f;
    int64_t seq;
    int node;
    bool operator<(const OpenEntry& o) const {
        if (f != o.f) return f > o.f;  // min-heap
        return seq > o.seq;            // FIFO among ties: insertion order
    }
};

}  // namespace

std::vector<MotionPrimitive> generate_primitives(const VehicleParams& params) {
    const double kappa_cap = 0.99 * curvature_limit(params);
    std::vector<MotionPrimitive> prims;
    prims.reserve(73);

    SegmentSpec straight;
    straight.x_end = 2.0;
    straight.y_end = 0.0;
    straight.dy = 0.0;
    straight.ddy = 0.0;
    prims.push_back(finalize(straight));

    for (const double u : {2.0, 4.0}) {
        // Heading targets slightly above the feasible peak so calibration
        // lands the largest members near the curvature limit.
        const double psi_top = 0.75 * curvature_limit(params) * u;
        const double d_top = 0.18 * curvature_limit(params) * u * u;
        // 18 members per length: three pure lateral offsets plus a grid of
        // three heading changes, each displaced toward or against the turn.
        // Mirroring doubles them; 1 + 2 * (18 + 18) = 73.
        std::vector<std::pair<double, double>> family;
        for (int k = 1; k <= 3; ++k) family.push_back({0.0, k * d_top / 3.0});
        for (int t = 1; t <= 3; ++t) {
            for (int k = -2; k <= 2; ++k) {
                family.push_back({t * psi_top / 3.0, k * d_top / 3.0});
            }
        }
        for (const auto& [psi, offset] : family) {
            const MotionPrimitive p = finalize(calibrate(u, psi, offset, kappa_cap));
            prims.push_back(p);
            prims.push_back(mirrored(p));
        }
    }
    return prims;
}

PlanResult plan(const OccupancyGrid& grid, const VehicleParams& params,
                const Configuration& q0, const GoalRegion& goal,
                const PlanOptions& options) {
    PlanResult result;
    const double kappa_max = curvature_limit(params);
    const double rho = 1.0 / kappa_max;
    const Pose2 goal_pose{goal.x, goal.y, goal.theta};
    const CollisionChecker checker(grid, params);

    if (checker.collides(q0.pose())) return result;

    const std::vector<MotionPrimitive> prims = generate_primitives(params);
    std::vector<std::array<PathSample, kSamplesPerSegment>> sweeps;
    sweeps.reserve(prims.size());
    for (const MotionPrimitive& p : prims) sweeps.push_back(discretize_spec(0.0, p.spec));

    // Expansions from the root respect the initial steering angle; segments
    // whose re-solved curvature exceeds the limit are dropped.
    const double root_kappa = curvature_for_steering(q0.beta, params.wheelbase);
    std::vector<std::array<PathSample, kSamplesPerSegment>> root_sweeps(prims.size());
    std::vector<bool> root_ok(prims.size(), false);
    std::vector<double> root_len(prims.size(), 0.0);
    for (size_t i = 0; i < prims.size(); ++i) {
        root_sweeps[i] = discretize_spec(root_kappa, prims[i].spec);
        root_ok[i] = sweep_peak_kappa(root_sweeps[i]) <= kappa_max;
        root_len[i] = sweep_length(root_sweeps[i]);
    }

    std::vector<Node> nodes;
    nodes.push_back({q0.pose(), 0.0, -1, -1});
    std::priority_queue<OpenEntry> open;
    std::unordered_map<uint64_t, double> best_g;
    int64_t seq = 0;
    open.push({dubins_distance(q0.pose(), goal_pose, rho), seq++, 0});
    best_g[bin_key(q0.pose())] = 0.0;

    // The analytic goal join: one quintic from the node to the exact goal.
    const auto try_snap = [&](const Node& node, double start_curvature,
                              SegmentSpec* out_spec) {
        const Pose2 local = to_local(node.pose, goal_pose);
        if (local.x < 0.3 || local.x > kMaxSegmentLength) return false;
        if (std::abs(local.theta) > 1.4) return false;
        SegmentSpec spec;
        spec.x_end = local.x;
        spec.y_end = local.y;
        spec.dy = std::tan(local.theta);
        spec.ddy = 0.0;
        std::array<PathSample, kSamplesPerSegment> sweep;
        try {
            sweep = discretize_spec(start_curvature, spec);
        } catch (const DegenerateSegment&) {
            return false;
        }
        if (sweep_peak_kappa(sweep) > kappa_max) return false;
        if (checker.sweep_collides(node.pose, sweep)) return false;
        *out_spec = spec;
        return true;
    };

    const auto finish = [&](int node_id, const SegmentSpec* snap_spec) {
        std::vector<int> chain_nodes;
        for (int id = node_id; id >= 0; id = nodes[id].parent) chain_nodes.push_back(id);
        std::reverse(chain_nodes.begin(), chain_nodes.end());
        for (size_t i = 1; i < chain_nodes.size(); ++i) {
            result.specs.push_back(prims[nodes[chain_nodes[i]].prim].spec);
        }
        if (snap_spec) result.specs.push_back(*snap_spec);
        const PathSpline spline = chain(q0, params, result.specs);
        const DiscretizedPath d = discretize(spline);
        for (const auto& seg : d.segments) {
            for (const PathSample& s : seg) result.polyline.push_back({s.gx, s.gy});
        }
        result.length = d.total_length();
        result.status = PlanResult::Status::kSuccess;
    };

    while (!open.empty() && result.expansions < options.budget) {
        const OpenEntry top = open.top();
        open.pop();
        Node node = nodes[top.node];
        const auto bin = best_g.find(bin_key(node.pose));
        if (bin != best_g.end() && bin->second < node.g - 1e-12) continue;  // stale
        ++result.expansions;

        // Edge validation is lazy: a node pays for its incoming sweep once,
        // when popped.
        if (node.parent >= 0) {
            const auto& sweep = node.parent == 0 ? root_sweeps[node.prim] : sweeps[node.prim];
            if (checker.sweep_collides(nodes[node.parent].pose, sweep)) continue;
        }

        const double h = dubins_distance(node.pose, goal_pose, rho);
        if (h <= options.snap_radius) {
            const double kappa_here = top.node == 0 ? root_kappa : 0.0;
            SegmentSpec snap;
            if (try_snap(node, kappa_here, &snap)) {
                finish(top.node, &snap);
                return result;
            }
            if (h <= 0.2 && top.node != 0) {
                finish(top.node, nullptr);
                return result;
            }
        }

        const bool is_root = top.node == 0;
        for (size_t i = 0; i < prims.size(); ++i) {
            if (is_root && !root_ok[i]) continue;
            const MotionPrimitive& p = prims[i];
            const Pose2 child_pose = compose(node.pose, p.end_offset);
            const double child_g = node.g + (is_root ? root_len[i] : p.length);
            const uint64_t key = bin_key(child_pose);
            const auto it = best_g.find(key);
            if (it != best_g.end() && it->second <= child_g + 1e-12) continue;
            best_g[key] = child_g;
            nodes.push_back({child_pose, child_g, top.node, static_cast<int>(i)});
            open.push({child_g + dubins_distance(child_pose, goal_pose, rho), seq++,
                       static_cast<int>(nodes.size()) - 1});
        }
    }
    return result;
}

}  // namespace maneuver
