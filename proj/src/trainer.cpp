#include "maneuver/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "maneuver/errors.hpp"
#include "maneuver/lattice.hpp"
#include "maneuver/optim.hpp"

namespace maneuver {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// SplitMix64 finalizer: independent per-map generator seeds from one seed.
uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Arc-length resampling with both endpoints kept; consecutive output spacing
// never exceeds `spacing`.
std::vector<Vec2> resample_polyline(std::span<const Vec2> pts, double spacing) {
    if (pts.size() < 2) return {pts.begin(), pts.end()};
    double total = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i) total += (pts[i + 1] - pts[i]).norm();
    if (!(total > 0.0)) return {pts.front()};

    const int n = std::max(1, static_cast<int>(std::ceil(total / spacing)));
    const double step = total / n;
    std::vector<Vec2> out;
    out.reserve(static_cast<size_t>(n) + 1);
    out.push_back(pts.front());
    size_t seg = 0;
    double seg_start = 0.0;
    double seg_len = (pts[1] - pts[0]).norm();
    for (int k = 1; k < n; ++k) {
        const double target = k * step;
        while (seg_start + seg_len < target && seg + 2 < pts.size()) {
            seg_start += seg_len;
            ++seg;
            seg_len = (pts[seg + 1] - pts[seg]).norm();
        }
        const double t = seg_len > 0.0 ? (target - seg_start) / seg_len : 0.0;
        out.push_back(pts[seg] + (pts[seg + 1] - pts[seg]) * t);
    }
    out.push_back(pts.back());
    return out;
}

json scenario_to_json(const Scenario& s) {
    json j;
    j["map"] = s.map;
    j["q0"] = {s.q0.beta, s.q0.theta, s.q0.x, s.q0.y};
    j["qk"] = {s.goal.theta, s.goal.x, s.goal.y};
    json ref = json::array();
    for (const Vec2& p : s.ref_path) ref.push_back({p.x, p.y});
    j["ref_path"] = std::move(ref);
    if (!s.segments.empty()) {
        json segs = json::array();
        for (const SegmentSpec& sp : s.segments) {
            segs.push_back({sp.x_end, sp.y_end, sp.dy, sp.ddy});
        }
        j["segments"] = std::move(segs);
    }
    return j;
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    s.map = j.at("map").get<std::string>();
    const json& q0 = j.at("q0");
    s.q0.beta = q0.at(0).get<double>();
    s.q0.theta = q0.at(1).get<double>();
    s.q0.x = q0.at(2).get<double>();
    s.q0.y = q0.at(3).get<double>();
    const json& qk = j.at("qk");
    s.goal.theta = qk.at(0).get<double>();
    s.goal.x = qk.at(1).get<double>();
    s.goal.y = qk.at(2).get<double>();
    for (const json& p : j.at("ref_path")) {
        s.ref_path.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    if (j.contains("segments")) {
        for (const json& sp : j.at("segments")) {
            s.segments.push_back({sp.at(0).get<double>(), sp.at(1).get<double>(),
                                  sp.at(2).get<double>(), sp.at(3).get<double>()});
        }
    }
    return s;
}

json breakdown_to_json(const LossBreakdown& b) {
    return {{"coll", b.coll}, {"curv", b.curv},   {"over", b.over},
            {"tcurv", b.tcurv}, {"total", b.total}, {"feasible", b.feasible}};
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

void validate_dataset(const Dataset& d, const VehicleParams& params) {
    std::set<std::string> seen_maps[3];
    const std::vector<Scenario>* splits[3] = {&d.train, &d.val, &d.test};
    const char* names[3] = {"train", "val", "test"};
    for (int i = 0; i < 3; ++i) {
        for (const Scenario& s : *splits[i]) seen_maps[i].insert(s.map);
    }
    for (int a = 0; a < 3; ++a) {
        for (int b = a + 1; b < 3; ++b) {
            for (const std::string& m : seen_maps[a]) {
                if (seen_maps[b].count(m)) {
                    throw DatasetError("map " + m + " is shared between " + names[a] +
                                       " and " + names[b]);
                }
            }
        }
    }

    const MapSet maps = load_maps(d);
    for (int i = 0; i < 3; ++i) {
        size_t idx = 0;
        for (const Scenario& s : *splits[i]) {
            const std::string where =
                std::string(names[i]) + "[" + std::to_string(idx++) + "]";
            for (size_t k = 0; k + 1 < s.ref_path.size(); ++k) {
                if ((s.ref_path[k + 1] - s.ref_path[k]).norm() > 0.1 + 1e-9) {
                    throw DatasetError(where + ": ref_path spacing exceeds 0.1 m");
                }
            }
            if (s.segments.empty()) continue;
            const PathSpline path = chain(s.q0, params, s.segments);
            const LossBreakdown audit =
                total_loss(path, maps.at(s.map), params, s.goal, s.ref_path);
            if (!audit.feasible) {
                throw DatasetError(where + ": stored reference plan is not feasible");
            }
        }
    }
}

}  // namespace

const std::vector<Scenario>& Dataset::split(std::string_view name) const {
    if (name == "train") return train;
    if (name == "val") return val;
    if (name == "test") return test;
    throw DatasetError("unknown split: " + std::string(name));
}

GenerateResult generate_dataset(const GenerateConfig& cfg, const VehicleParams& params) {
    if (cfg.out_dir.empty()) throw DatasetError("generate_dataset needs an out_dir");
    if (cfg.maps_train < 1 || cfg.maps_val < 1 || cfg.maps_test < 1) {
        throw DatasetError("each split needs at least one map");
    }
    if (cfg.scenarios_train < 0 || cfg.scenarios_val < 0 || cfg.scenarios_test < 0 ||
        cfg.obstacle_count_max < 0 || cfg.attempt_factor < 1) {
        throw DatasetError("negative generation parameter");
    }
    const int total_maps = cfg.maps_train + cfg.maps_val + cfg.maps_test;
    if (!cfg.source_maps.empty() &&
        static_cast<int>(cfg.source_maps.size()) < total_maps) {
        throw DatasetError("need " + std::to_string(total_maps) + " source maps, got " +
                           std::to_string(cfg.source_maps.size()));
    }

    fs::create_directories(fs::path(cfg.out_dir) / "maps");
    fs::create_directories(fs::path(cfg.out_dir) / "scenarios");

    GenerateResult result;
    result.dataset.root = cfg.out_dir;

    struct SplitDef {
        const char* name;
        int maps;
        int target;
        std::vector<Scenario>* scen;
        SplitStats* stats;
    };
    SplitDef defs[3] = {
        {"train", cfg.maps_train, cfg.scenarios_train, &result.dataset.train, &result.train},
        {"val", cfg.maps_val, cfg.scenarios_val, &result.dataset.val, &result.val},
        {"test", cfg.maps_test, cfg.scenarios_test, &result.dataset.test, &result.test},
    };

    const Configuration q0{};  // scenarios start at the grid anchor pose
    int global_map = 0;

    for (SplitDef& def : defs) {
        def.stats->maps = def.maps;
        double plan_ms = 0.0;
        int plans_timed = 0;
        for (int m = 0; m < def.maps; ++m, ++global_map) {
            const int target = def.target / def.maps + (m < def.target % def.maps ? 1 : 0);
            std::mt19937_64 rng(splitmix64(
                cfg.seed ^ (0x9e3779b97f4a7c15ull * static_cast<uint64_t>(global_map + 1))));

            OccupancyGrid base;
            if (!cfg.source_maps.empty()) base = load_grid(cfg.source_maps[global_map]);
            const int obstacles =
                std::uniform_int_distribution<int>(0, cfg.obstacle_count_max)(rng);
            const OccupancyGrid grid =
                add_random_obstacles(base, obstacles, rng(), params, q0.pose());

            char fname[64];
            std::snprintf(fname, sizeof fname, "%s_%03d.png", def.name, m);
            const std::string rel = std::string("maps/") + fname;
            save_grid((fs::path(cfg.out_dir) / rel).string(), grid);

            // Goals are sampled uniformly over free cells ahead of the start
            // (x >= 2 m); the path representation cannot reach goals behind it.
            std::vector<GridCell> free_cells;
            for (int r = 0; r < OccupancyGrid::kSize; ++r) {
                for (int c = 0; c < OccupancyGrid::kSize; ++c) {
                    if (!grid.cell_occupied(r, c) && grid.cell_center({r, c}).x >= 2.0) {
                        free_cells.push_back({r, c});
                    }
                }
            }
            if (free_cells.empty()) continue;

            std::uniform_int_distribution<size_t> cell_dist(0, free_cells.size() - 1);
            std::uniform_real_distribution<double> theta_dist(-std::numbers::pi / 2.0,
                                                              std::numbers::pi / 2.0);
            PlanOptions popt;
            popt.budget = cfg.plan_budget;

            int kept = 0;
            const int max_attempts = target * cfg.attempt_factor;
            for (int att = 0; att < max_attempts && kept < target; ++att) {
                ++def.stats->attempted;
                const Vec2 gp = grid.cell_center(free_cells[cell_dist(rng)]);
                GoalRegion goal;
                goal.x = gp.x;
                goal.y = gp.y;
                goal.theta = theta_dist(rng);

                if (footprint_collides(grid, {goal.x, goal.y, goal.theta}, params)) {
                    ++def.stats->skipped;
                    continue;
                }

                const auto t0 = std::chrono::steady_clock::now();
                const PlanResult pr = plan(grid, params, q0, goal, popt);
                plan_ms += ms_since(t0);
                ++plans_timed;
                if (!pr.success()) {
                    ++def.stats->skipped;
                    continue;
                }

                // The stored plan must score feasible against its own polyline.
                const PathSpline path = chain(q0, params, pr.specs);
                const LossBreakdown audit = total_loss(path, grid, params, goal, pr.polyline);
                if (!audit.feasible) {
                    ++def.stats->skipped;
                    ++def.stats->audit_failures;
                    continue;
                }

                Scenario s;
                s.map = rel;
                s.q0 = q0;
                s.goal = goal;
                s.ref_path = resample_polyline(pr.polyline, 0.1);
                s.segments = pr.specs;
                def.scen->push_back(std::move(s));
                ++kept;
            }
        }
        def.stats->scenarios = static_cast<int>(def.scen->size());
        def.stats->mean_plan_ms = plans_timed > 0 ? plan_ms / plans_timed : 0.0;

        const fs::path jp =
            fs::path(cfg.out_dir) / "scenarios" / (std::string(def.name) + ".jsonl");
        std::ofstream out(jp);
        if (!out) throw DatasetError("cannot write " + jp.string());
        for (const Scenario& s : *def.scen) out << scenario_to_json(s).dump() << "\n";
    }

    json meta;
    meta["seed"] = cfg.seed;
    meta["obstacle_count_max"] = cfg.obstacle_count_max;
    meta["plan_budget"] = cfg.plan_budget;
    json splits;
    for (const SplitDef& def : defs) {
        const SplitStats& st = *def.stats;
        splits[def.name] = {
            {"maps", st.maps},
            {"scenarios", st.scenarios},
            {"attempted", st.attempted},
            {"skipped", st.skipped},
            {"audit_failures", st.audit_failures},
            {"skip_rate",
             st.attempted > 0 ? static_cast<double>(st.skipped) / st.attempted : 0.0},
            {"mean_plan_ms", st.mean_plan_ms},
        };
    }
    meta["splits"] = std::move(splits);
    std::ofstream mf(fs::path(cfg.out_dir) / "meta.json");
    if (!mf) throw DatasetError("cannot write meta.json in " + cfg.out_dir);
    mf << meta.dump(2) << "\n";

    return result;
}

Dataset load_dataset(const std::string& root, bool validate, const VehicleParams& params) {
    Dataset d;
    d.root = root;
    const char* names[3] = {"train", "val", "test"};
    std::vector<Scenario>* outs[3] = {&d.train, &d.val, &d.test};
    for (int i = 0; i < 3; ++i) {
        const fs::path p = fs::path(root) / "scenarios" / (std::string(names[i]) + ".jsonl");
        std::ifstream in(p);
        if (!in) throw DatasetError("cannot open " + p.string());
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                outs[i]->push_back(scenario_from_json(json::parse(line)));
            } catch (const json::exception& e) {
                throw DatasetError(p.string() + ":" + std::to_string(lineno) + ": " +
                                   e.what());
            }
        }
    }
    if (validate) validate_dataset(d, params);
    return d;
}

MapSet load_maps(const Dataset& data) {
    MapSet maps;
    for (const std::vector<Scenario>* split : {&data.train, &data.val, &data.test}) {
        for (const Scenario& s : *split) {
            if (!maps.count(s.map)) {
                maps.emplace(s.map, load_grid((fs::path(data.root) / s.map).string()));
            }
        }
    }
    return maps;
}

std::vector<BatchItem> make_batch_items(std::span<const Scenario> scenarios,
                                        const MapSet& maps) {
    std::vector<BatchItem> items;
    items.reserve(scenarios.size());
    for (const Scenario& s : scenarios) {
        const auto it = maps.find(s.map);
        if (it == maps.end()) throw DatasetError("map not loaded: " + s.map);
        items.push_back({&it->second, s.q0, s.goal, s.ref_path});
    }
    return items;
}

TrainResult train(PolicyNet& net, const Dataset& data, const TrainConfig& cfg,
                  const VehicleParams& params) {
    if (data.train.empty()) throw DatasetError("train split is empty");
    if (cfg.out_dir.empty()) throw DatasetError("train needs an out_dir");
    if (cfg.batch < 1 || cfg.epochs < 1 || cfg.n_segments < 1) {
        throw DatasetError("bad training config");
    }

    fs::create_directories(cfg.out_dir);
    const MapSet maps = load_maps(data);
    const std::vector<BatchItem> train_items = make_batch_items(data.train, maps);
    const std::vector<BatchItem> val_items = make_batch_items(data.val, maps);

    LossOptions opt;
    opt.gamma = cfg.gamma;
    opt.tcurv_enabled = cfg.tcurv_enabled;

    AdamConfig adam;
    adam.lr = cfg.lr;
    AdamState state;

    std::ofstream metrics(fs::path(cfg.out_dir) / "metrics.jsonl", std::ios::app);
    if (!metrics) throw DatasetError("cannot open metrics.jsonl in " + cfg.out_dir);

    TrainResult result;
    result.last_checkpoint = (fs::path(cfg.out_dir) / "last").string();
    const std::string best_prefix = (fs::path(cfg.out_dir) / "best").string();

    std::mt19937_64 shuffle_rng(cfg.seed);
    std::vector<size_t> order(train_items.size());
    std::iota(order.begin(), order.end(), size_t{0});

    double best_acc = -1.0;
    double best_loss = std::numeric_limits<double>::infinity();

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto e0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        if (cfg.lr_end > 0.0 && cfg.epochs > 1) {
            const double t = static_cast<double>(epoch - 1) / (cfg.epochs - 1);
            adam.lr = cfg.lr_end +
                      0.5 * (cfg.lr - cfg.lr_end) * (1.0 + std::cos(std::numbers::pi * t));
        }

        std::vector<LossBreakdown> epoch_losses;
        epoch_losses.reserve(train_items.size());
        bool aborted = false;
        for (size_t off = 0; off < order.size(); off += static_cast<size_t>(cfg.batch)) {
            const size_t n = std::min<size_t>(cfg.batch, order.size() - off);
            std::vector<BatchItem> batch(n);
            for (size_t k = 0; k < n; ++k) batch[k] = train_items[order[off + k]];
            try {
                BatchGradient g =
                    batch_gradient(net, params, batch, cfg.n_segments, opt, cfg.mode);
                if (cfg.clip_norm > 0.0) {
                    double sq = 0.0;
                    for (const double v : g.param_grads) sq += v * v;
                    const double norm = std::sqrt(sq);
                    if (norm > cfg.clip_norm) {
                        const double scale = cfg.clip_norm / norm;
                        for (double& v : g.param_grads) v *= scale;
                    }
                }
                adam_step(net.params(), g.param_grads, state, adam);
                epoch_losses.insert(epoch_losses.end(), g.per_item.begin(),
                                    g.per_item.end());
            } catch (const NonFiniteGradient&) {
                aborted = true;
                break;
            }
        }
        if (aborted) {
            // Parameters still hold the last finite update.
            result.aborted_non_finite = true;
            save_checkpoint(net, result.last_checkpoint);
            break;
        }

        EpochStats st;
        st.epoch = epoch;
        int feasible = 0;
        for (const LossBreakdown& b : epoch_losses) feasible += b.feasible ? 1 : 0;
        st.train_accuracy =
            epoch_losses.empty() ? 0.0 : static_cast<double>(feasible) / epoch_losses.size();
        st.train_mean = mean_breakdown(epoch_losses);

        if (!val_items.empty()) {
            const BatchEval ev =
                evaluate_scenarios(net, params, val_items, cfg.n_segments, opt, cfg.mode);
            std::vector<LossBreakdown> vl;
            vl.reserve(ev.items.size());
            for (const ScenarioEval& e : ev.items) vl.push_back(e.loss);
            st.val_accuracy = static_cast<double>(ev.feasible_count) / ev.items.size();
            st.val_mean = mean_breakdown(vl);
        }
        st.seconds = ms_since(e0) / 1000.0;
        result.history.push_back(st);
        if (cfg.on_epoch) cfg.on_epoch(st);

        const json rec = {
            {"epoch", st.epoch},
            {"train_accuracy", st.train_accuracy},
            {"val_accuracy", st.val_accuracy},
            {"train_loss", breakdown_to_json(st.train_mean)},
            {"val_loss", breakdown_to_json(st.val_mean)},
            {"seconds", st.seconds},
        };
        metrics << rec.dump() << "\n";
        metrics.flush();

        save_checkpoint(net, result.last_checkpoint);
        const double sel_acc = val_items.empty() ? st.train_accuracy : st.val_accuracy;
        const double sel_loss = val_items.empty() ? st.train_mean.total : st.val_mean.total;
        if (sel_acc > best_acc || (sel_acc == best_acc && sel_loss < best_loss)) {
            best_acc = sel_acc;
            best_loss = sel_loss;
            result.best_epoch = epoch;
            result.best_checkpoint = best_prefix;
            save_checkpoint(net, best_prefix);
        }
    }
    return result;
}

SplitMetrics evaluate_split(const PolicyNet& net, const Dataset& data,
                            std::string_view split, int n_segments,
                            const LossOptions& options, const VehicleParams& params,
                            ExecMode mode) {
    const std::vector<Scenario>& scen = data.split(split);
    SplitMetrics m;
    m.count = static_cast<int>(scen.size());
    if (scen.empty()) return m;

    const MapSet maps = load_maps(data);
    const std::vector<BatchItem> items = make_batch_items(scen, maps);
    const BatchEval ev = evaluate_scenarios(net, params, items, n_segments, options, mode);

    m.accuracy = static_cast<double>(ev.feasible_count) / ev.items.size();
    double turn = 0.0, len = 0.0, t = 0.0, t2 = 0.0;
    for (const ScenarioEval& e : ev.items) {
        turn += e.accumulated_turn;
        len += e.length;
        t += e.time_ms;
        t2 += e.time_ms * e.time_ms;
    }
    const double n = static_cast<double>(ev.items.size());
    m.mean_turn = turn / n;
    m.mean_length = len / n;
    m.mean_time_ms = t / n;
    m.stddev_time_ms = std::sqrt(std::max(0.0, t2 / n - m.mean_time_ms * m.mean_time_ms));
    return m;
}

}  // namespace maneuver
