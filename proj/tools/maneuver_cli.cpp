// Command-line surface over the maneuver library: dataset generation,
// training, single-shot planning, budgeted evaluation, and reachable-set
// rendering. Exit codes: 0 ok, 1 plan infeasible, 2 error.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "maneuver/errors.hpp"
#include "maneuver/lattice.hpp"
#include "maneuver/render.hpp"
#include "maneuver/trainer.hpp"

namespace {

using namespace maneuver;
using nlohmann::json;

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

json breakdown_json(const LossBreakdown& b) {
    return {{"coll", b.coll},   {"curv", b.curv},   {"over", b.over},
            {"tcurv", b.tcurv}, {"total", b.total}, {"feasible", b.feasible}};
}

std::vector<Vec2> path_polyline(const DiscretizedPath& d) {
    std::vector<Vec2> poly;
    poly.reserve(d.segments.size() * kSamplesPerSegment);
    for (const auto& seg : d.segments) {
        for (const PathSample& s : seg) poly.push_back({s.gx, s.gy});
    }
    return poly;
}

const char* infeasible_reason(const LossBreakdown& b) {
    if (b.coll > 0.0) return "collision";
    if (b.curv > 0.0) return "curvature";
    return "overshoot";
}

void write_json(const std::string& path, const json& j) {
    if (path.empty()) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
    MeanStd r;
    if (v.empty()) return r;
    double s = 0.0, s2 = 0.0;
    for (const double x : v) {
        s += x;
        s2 += x * x;
    }
    r.mean = s / v.size();
    r.stddev = std::sqrt(std::max(0.0, s2 / v.size() - r.mean * r.mean));
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learning-based local car-maneuver planning"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI config file; keys mirror the flag names");
    int exit_code = 0;

    // gendata
    GenerateConfig gen;
    auto* g = app.add_subcommand("gendata", "Generate obstacle maps with reference plans");
    g->add_option("--out", gen.out_dir, "Dataset directory")->required();
    g->add_option("--source-maps", gen.source_maps,
                  "Base map images, dealt to train/val/test in order");
    g->add_option("--maps-train", gen.maps_train)->capture_default_str();
    g->add_option("--maps-val", gen.maps_val)->capture_default_str();
    g->add_option("--maps-test", gen.maps_test)->capture_default_str();
    g->add_option("--scenarios-train", gen.scenarios_train)->capture_default_str();
    g->add_option("--scenarios-val", gen.scenarios_val)->capture_default_str();
    g->add_option("--scenarios-test", gen.scenarios_test)->capture_default_str();
    g->add_option("--obstacle-max", gen.obstacle_count_max, "Max obstacles per map")
        ->capture_default_str();
    g->add_option("--plan-budget", gen.plan_budget, "Search expansion budget")
        ->capture_default_str();
    g->add_option("--attempt-factor", gen.attempt_factor)->capture_default_str();
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->callback([&] {
        const GenerateResult r = generate_dataset(gen);
        const auto line = [](const char* name, const SplitStats& s) {
            std::printf(
                "%-5s maps=%d scenarios=%d attempted=%d skipped=%d audit_failures=%d "
                "mean_plan_ms=%.2f\n",
                name, s.maps, s.scenarios, s.attempted, s.skipped, s.audit_failures,
                s.mean_plan_ms);
        };
        line("train", r.train);
        line("val", r.val);
        line("test", r.test);
    });

    // train
    TrainConfig tc;
    std::string train_data;
    uint64_t init_seed = 0;
    bool no_tcurv = false;
    bool train_serial = false;
    auto* t = app.add_subcommand("train", "Train the policy network");
    t->add_option("--data", train_data, "Dataset directory")->required();
    t->add_option("--out", tc.out_dir, "Run directory (checkpoints, metrics.jsonl)")
        ->required();
    t->add_option("--epochs", tc.epochs)->capture_default_str();
    t->add_option("--batch", tc.batch)->capture_default_str();
    t->add_option("--lr", tc.lr)->capture_default_str();
    t->add_option("--lr-end", tc.lr_end, "Cosine-decay floor; 0 keeps lr constant")
        ->capture_default_str();
    t->add_option("--clip-norm", tc.clip_norm, "Gradient L2 norm cap; 0 disables")
        ->capture_default_str();
    t->add_option("--gamma", tc.gamma)->capture_default_str();
    t->add_option("--n-segments", tc.n_segments)->capture_default_str();
    t->add_option("--seed", tc.seed, "Shuffle seed, also the init seed unless overridden")
        ->capture_default_str();
    auto* iso = t->add_option("--init-seed", init_seed, "Network init seed");
    t->add_flag("--no-tcurv", no_tcurv, "Drop the total-curvature term from the loss");
    t->add_flag("--serial", train_serial, "Use the serial batch kernels");
    t->callback([&] {
        tc.tcurv_enabled = !no_tcurv;
        tc.mode = train_serial ? ExecMode::Serial : ExecMode::Parallel;
        tc.on_epoch = [](const EpochStats& st) {
            std::printf(
                "epoch %3d  train acc %.3f loss %.4f | val acc %.3f loss %.4f | %.1fs\n",
                st.epoch, st.train_accuracy, st.train_mean.total, st.val_accuracy,
                st.val_mean.total, st.seconds);
            std::fflush(stdout);
        };
        const Dataset data = load_dataset(train_data);
        NetConfig nc;
        nc.init_seed = iso->count() > 0 ? init_seed : tc.seed;
        PolicyNet net(nc);
        const TrainResult r = train(net, data, tc);
        if (r.aborted_non_finite) {
            std::cerr << "training aborted on a non-finite gradient; last-good "
                         "checkpoint kept\n";
            exit_code = 2;
            return;
        }
        std::printf("best epoch %d, checkpoint %s\n", r.best_epoch,
                    r.best_checkpoint.c_str());
    });

    // plan
    struct {
        std::string map, checkpoint, out, png;
        std::vector<double> q0{0.0, 0.0, 0.0, 0.0};
        std::vector<double> qk;
        int n_segments = 6;
        int repeat = 1;
    } pa;
    auto* p = app.add_subcommand("plan", "Plan one maneuver with a trained policy");
    p->add_option("--map", pa.map, "Occupancy map image")->required();
    p->add_option("--checkpoint", pa.checkpoint, "Checkpoint prefix")->required();
    p->add_option("--q0", pa.q0, "Start: beta,theta,x,y")->delimiter(',')->expected(4);
    p->add_option("--qk", pa.qk, "Goal: theta,x,y")->delimiter(',')->expected(3)->required();
    p->add_option("--n-segments", pa.n_segments)->capture_default_str();
    p->add_option("--repeat", pa.repeat, "Timing repeats")->capture_default_str();
    p->add_option("--out", pa.out, "Plan JSON path (default stdout)");
    p->add_option("--png", pa.png, "Render the path to this PNG");
    p->callback([&] {
        try {
            const OccupancyGrid grid = load_grid(pa.map);
            const PolicyNet net = load_checkpoint(pa.checkpoint);
            const VehicleParams params = kia_rio();
            const Configuration q0{pa.q0[0], pa.q0[1], pa.q0[2], pa.q0[3]};
            GoalRegion goal;
            goal.theta = pa.qk[0];
            goal.x = pa.qk[1];
            goal.y = pa.qk[2];

            PolicyWorkspace ws;
            RolloutResult roll;
            std::vector<double> times;
            const int reps = std::max(1, pa.repeat);
            times.reserve(reps);
            for (int r = 0; r < reps; ++r) {
                const auto t0 = std::chrono::steady_clock::now();
                roll = rollout(net, grid, params, q0, goal, pa.n_segments, &ws);
                times.push_back(ms_since(t0));
            }
            const DiscretizedPath d = discretize(roll.path);
            // scored against its own polyline: any body contact shows up as coll > 0
            const LossBreakdown loss =
                total_loss(roll.path, grid, params, goal, path_polyline(d));

            json out;
            json specs = json::array();
            for (const SegmentSpec& s : roll.specs) {
                specs.push_back({s.x_end, s.y_end, s.dy, s.ddy});
            }
            out["specs"] = std::move(specs);
            json samples = json::array();
            for (const auto& seg : d.segments) {
                for (const PathSample& s : seg) {
                    samples.push_back({s.gx, s.gy, s.heading, s.kappa});
                }
            }
            out["samples"] = std::move(samples);
            out["loss"] = breakdown_json(loss);
            out["feasible"] = loss.feasible;
            const MeanStd ms = mean_std(times);
            out["time_ms"] = ms.mean;
            if (reps > 1) {
                out["time_stddev_ms"] = ms.stddev;
                out["repeats"] = reps;
            }
            if (!loss.feasible) out["reason"] = infeasible_reason(loss);
            write_json(pa.out, out);
            if (!pa.png.empty()) render_path_png(pa.png, grid, d, params);
            exit_code = loss.feasible ? 0 : 1;
        } catch (const std::exception& e) {
            std::cout << json{{"reason", "io"}, {"message", e.what()}}.dump() << "\n";
            std::cerr << "error: " << e.what() << "\n";
            exit_code = 2;
        }
    });

    // eval
    struct {
        std::string data, checkpoint, out;
        std::string split = "test";
        int n_segments = 6;
        double budget_ms = 50.0;
        int plan_budget = 50000;
        bool no_validate = false;
    } ea;
    auto* e = app.add_subcommand(
        "eval", "Evaluate the policy and the search planner on a dataset split");
    e->add_option("--data", ea.data, "Dataset directory")->required();
    e->add_option("--checkpoint", ea.checkpoint, "Checkpoint prefix")->required();
    e->add_option("--split", ea.split)->capture_default_str();
    e->add_option("--n-segments", ea.n_segments)->capture_default_str();
    e->add_option("--budget-ms", ea.budget_ms, "Extra time budget to report")
        ->capture_default_str();
    e->add_option("--plan-budget", ea.plan_budget, "Search expansion budget")
        ->capture_default_str();
    e->add_flag("--no-validate", ea.no_validate, "Skip dataset revalidation on load");
    e->add_option("--out", ea.out, "Metrics JSON path (default stdout)");
    e->callback([&] {
        const Dataset data = load_dataset(ea.data, !ea.no_validate);
        const std::vector<Scenario>& scen = data.split(ea.split);
        if (scen.empty()) throw Error("split " + ea.split + " is empty");
        const PolicyNet net = load_checkpoint(ea.checkpoint);
        const VehicleParams params = kia_rio();
        const MapSet maps = load_maps(data);
        const std::vector<BatchItem> items = make_batch_items(scen, maps);

        // one timed run per scenario per planner; budgets are applied to the
        // recorded times afterwards
        const BatchEval ev =
            evaluate_scenarios(net, params, items, ea.n_segments, {}, ExecMode::Serial);

        std::vector<double> pol_times, lat_times(scen.size(), 0.0);
        std::vector<char> lat_ok(scen.size(), 0);
        double pol_turn = 0.0, pol_len = 0.0;
        for (const ScenarioEval& s : ev.items) {
            pol_times.push_back(s.time_ms);
            pol_turn += s.accumulated_turn;
            pol_len += s.length;
        }
        double lat_turn = 0.0, lat_len = 0.0;
        int lat_solved = 0;
        PlanOptions popt;
        popt.budget = ea.plan_budget;
        for (size_t i = 0; i < scen.size(); ++i) {
            const Scenario& s = scen[i];
            const OccupancyGrid& grid = maps.at(s.map);
            const auto t0 = std::chrono::steady_clock::now();
            const PlanResult pr = plan(grid, params, s.q0, s.goal, popt);
            lat_times[i] = ms_since(t0);
            if (!pr.success()) continue;
            const PathSpline path = chain(s.q0, params, pr.specs);
            const LossBreakdown lb = total_loss(path, grid, params, s.goal, s.ref_path);
            if (!lb.feasible) continue;
            lat_ok[i] = 1;
            ++lat_solved;
            const DiscretizedPath d = discretize(path);
            lat_turn += d.accumulated_turn();
            lat_len += d.total_length();
        }

        std::vector<double> budgets = {10.0, 20.0, 50.0, 100.0, 1000.0};
        if (std::find(budgets.begin(), budgets.end(), ea.budget_ms) == budgets.end()) {
            budgets.push_back(ea.budget_ms);
            std::sort(budgets.begin(), budgets.end());
        }
        const double n = static_cast<double>(scen.size());
        const auto acc_at = [&](const std::vector<char>& ok, const std::vector<double>& ms_v,
                                double budget) {
            int c = 0;
            for (size_t i = 0; i < ok.size(); ++i) {
                if (ok[i] && ms_v[i] <= budget) ++c;
            }
            return c / n;
        };
        std::vector<char> pol_ok(scen.size(), 0);
        for (size_t i = 0; i < scen.size(); ++i) pol_ok[i] = ev.items[i].loss.feasible;

        const MeanStd pol_t = mean_std(pol_times);
        const MeanStd lat_t = mean_std(lat_times);
        json out;
        out["split"] = ea.split;
        out["count"] = scen.size();
        json pol;
        pol["accuracy"] = ev.feasible_count / n;
        pol["mean_turn"] = pol_turn / n;
        pol["mean_length"] = pol_len / n;
        pol["mean_time_ms"] = pol_t.mean;
        pol["stddev_time_ms"] = pol_t.stddev;
        json lat;
        lat["accuracy"] = lat_solved / n;
        lat["solved"] = lat_solved;
        lat["mean_turn_solved"] = lat_solved > 0 ? lat_turn / lat_solved : 0.0;
        lat["mean_length_solved"] = lat_solved > 0 ? lat_len / lat_solved : 0.0;
        lat["mean_time_ms"] = lat_t.mean;
        lat["stddev_time_ms"] = lat_t.stddev;
        json pol_acc, lat_acc;
        for (const double b : budgets) {
            const std::string key = std::to_string(static_cast<long long>(b));
            pol_acc[key] = acc_at(pol_ok, pol_times, b);
            lat_acc[key] = acc_at(lat_ok, lat_times, b);
        }
        pol["accuracy_at_budget_ms"] = std::move(pol_acc);
        lat["accuracy_at_budget_ms"] = std::move(lat_acc);
        out["policy"] = std::move(pol);
        out["lattice"] = std::move(lat);

        std::printf("%-8s %9s %10s %10s %12s\n", "planner", "accuracy", "turn[rad]",
                    "length[m]", "time[ms]");
        std::printf("%-8s %9.3f %10.3f %10.2f %6.2f+-%0.2f\n", "policy",
                    ev.feasible_count / n, pol_turn / n, pol_len / n, pol_t.mean,
                    pol_t.stddev);
        std::printf("%-8s %9.3f %10.3f %10.2f %6.2f+-%0.2f\n", "lattice", lat_solved / n,
                    lat_solved > 0 ? lat_turn / lat_solved : 0.0,
                    lat_solved > 0 ? lat_len / lat_solved : 0.0, lat_t.mean, lat_t.stddev);
        std::printf("budget[ms]:");
        for (const double b : budgets) std::printf(" %g", b);
        std::printf("\npolicy acc:");
        for (const double b : budgets) std::printf(" %.3f", acc_at(pol_ok, pol_times, b));
        std::printf("\nlattice acc:");
        for (const double b : budgets) std::printf(" %.3f", acc_at(lat_ok, lat_times, b));
        std::printf("\n");
        if (!ea.out.empty()) write_json(ea.out, out);
    });

    // reachable
    struct {
        std::string map, checkpoint, out;
        std::vector<double> q0{0.0, 0.0, 0.0, 0.0};
        ReachableOptions opt;
    } ra;
    auto* r = app.add_subcommand("reachable", "Render the reachable-goal heatmap");
    r->add_option("--map", ra.map, "Occupancy map image")->required();
    r->add_option("--checkpoint", ra.checkpoint, "Checkpoint prefix")->required();
    r->add_option("--out", ra.out, "Output PNG")->required();
    r->add_option("--q0", ra.q0, "Start: beta,theta,x,y")->delimiter(',')->expected(4);
    r->add_option("--grid-step", ra.opt.grid_step, "Goal spacing [m]")->capture_default_str();
    r->add_option("--headings", ra.opt.headings)->capture_default_str();
    r->add_option("--n-segments", ra.opt.n_segments)->capture_default_str();
    r->callback([&] {
        const OccupancyGrid grid = load_grid(ra.map);
        const PolicyNet net = load_checkpoint(ra.checkpoint);
        const VehicleParams params = kia_rio();
        const Configuration q0{ra.q0[0], ra.q0[1], ra.q0[2], ra.q0[3]};
        const ReachableResult res = compute_reachable(net, grid, params, q0, ra.opt);
        render_reachable_png(ra.out, grid, res);
        std::printf("goals=%zu rollouts=%d feasible=%d (%.1f%%)\n", res.goals.size(),
                    res.rollouts, res.feasible,
                    100.0 * res.feasible / std::max(1, res.rollouts));
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return exit_code;
}
