#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "maneuver/errors.hpp"
#include "maneuver/trainer.hpp"
#include "testutil.hpp"

using namespace maneuver;
namespace fs = std::filesystem;

namespace {

GenerateConfig tiny_gen(const std::string& out) {
    GenerateConfig cfg;
    cfg.out_dir = out;
    cfg.maps_train = 2;
    cfg.maps_val = 1;
    cfg.maps_test = 1;
    cfg.scenarios_train = 6;
    cfg.scenarios_val = 3;
    cfg.scenarios_test = 3;
    cfg.obstacle_count_max = 2;
    cfg.seed = 7;
    cfg.plan_budget = 20000;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("generated datasets are valid, reloadable and seed-deterministic") {
    testutil::TempDir tmp("gen");
    const GenerateResult r = generate_dataset(tiny_gen(tmp.file("a")));
    CHECK(r.train.maps == 2);
    CHECK(r.train.scenarios > 0);
    CHECK(r.train.scenarios <= 6);
    CHECK(r.val.scenarios <= 3);
    CHECK(r.train.attempted >= r.train.scenarios);

    // reload with full validation (rebuild + feasibility audit)
    const Dataset data = load_dataset(tmp.file("a"), true);
    CHECK(data.train.size() == static_cast<size_t>(r.train.scenarios));
    CHECK(data.val.size() == static_cast<size_t>(r.val.scenarios));
    CHECK(data.test.size() == static_cast<size_t>(r.test.scenarios));

    std::set<std::string> train_maps, other_maps;
    for (const Scenario& s : data.train) train_maps.insert(s.map);
    for (const Scenario& s : data.val) other_maps.insert(s.map);
    for (const Scenario& s : data.test) other_maps.insert(s.map);
    for (const std::string& m : train_maps) CHECK(other_maps.count(m) == 0);

    for (const Scenario& s : data.train) {
        CHECK(s.goal.x >= 2.0);
        CHECK_FALSE(s.ref_path.empty());
        for (size_t i = 0; i + 1 < s.ref_path.size(); ++i) {
            CHECK((s.ref_path[i + 1] - s.ref_path[i]).norm() <= 0.1 + 1e-9);
        }
        CHECK_FALSE(s.segments.empty());
    }

    // identical seed, identical bytes
    const GenerateResult r2 = generate_dataset(tiny_gen(tmp.file("b")));
    CHECK(r2.train.scenarios == r.train.scenarios);
    for (const char* name : {"scenarios/train.jsonl", "scenarios/val.jsonl",
                             "scenarios/test.jsonl"}) {
        CHECK(slurp(fs::path(tmp.file("a")) / name) == slurp(fs::path(tmp.file("b")) / name));
    }
    for (const auto& entry : fs::directory_iterator(fs::path(tmp.file("a")) / "maps")) {
        const fs::path twin = fs::path(tmp.file("b")) / "maps" / entry.path().filename();
        CHECK(slurp(entry.path()) == slurp(twin));
    }

    // a different seed changes the data
    GenerateConfig other = tiny_gen(tmp.file("c"));
    other.seed = 8;
    generate_dataset(other);
    CHECK(slurp(fs::path(tmp.file("a")) / "scenarios/train.jsonl") !=
          slurp(fs::path(tmp.file("c")) / "scenarios/train.jsonl"));
}

TEST_CASE("dataset loading reports structural problems") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/dataset"), DatasetError);

    testutil::TempDir tmp("badset");
    const GenerateResult r = generate_dataset(tiny_gen(tmp.file("d")));
    REQUIRE(r.train.scenarios > 0);

    // corrupt one scenario line
    const fs::path jsonl = fs::path(tmp.file("d")) / "scenarios" / "train.jsonl";
    std::string content = slurp(jsonl);
    content.insert(0, "{oops\n");
    std::ofstream(jsonl, std::ios::trunc) << content;
    try {
        load_dataset(tmp.file("d"));
        FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
}

TEST_CASE("split lookup is by name only") {
    Dataset d;
    d.train.resize(2);
    d.val.resize(1);
    CHECK(d.split("train").size() == 2);
    CHECK(d.split("val").size() == 1);
    CHECK(d.split("test").empty());
    CHECK_THROWS_AS(d.split("holdout"), DatasetError);
}

TEST_CASE("a short training run produces checkpoints, metrics and history") {
    testutil::TempDir tmp("train");
    const GenerateResult gen = generate_dataset(tiny_gen(tmp.file("data")));
    REQUIRE(gen.train.scenarios > 0);
    const Dataset data = load_dataset(tmp.file("data"), false);

    NetConfig nc;
    nc.conv_channels = {1, 1, 2, 2};
    nc.map_hidden = 16;
    nc.latent = 8;
    nc.conf_hidden = 8;
    nc.trunk = 16;
    nc.head_hidden = 6;
    nc.init_seed = 3;
    PolicyNet net(nc);
    const std::vector<double> before = net.params();

    TrainConfig tc;
    tc.n_segments = 2;
    tc.epochs = 2;
    tc.batch = 4;
    tc.lr = 1e-3;
    tc.lr_end = 1e-4;
    tc.clip_norm = 5.0;
    tc.seed = 9;
    tc.out_dir = tmp.file("run");
    tc.mode = ExecMode::Serial;
    int callbacks = 0;
    tc.on_epoch = [&](const EpochStats& st) {
        ++callbacks;
        CHECK(st.epoch == callbacks);
    };

    const TrainResult result = train(net, data, tc);
    CHECK_FALSE(result.aborted_non_finite);
    REQUIRE(result.history.size() == 2);
    CHECK(callbacks == 2);
    CHECK(result.best_epoch >= 1);
    CHECK(net.params() != before);  // parameters actually moved
    for (const EpochStats& st : result.history) {
        CHECK(st.train_accuracy >= 0.0);
        CHECK(st.train_accuracy <= 1.0);
        CHECK(st.val_accuracy >= 0.0);
        CHECK(st.val_accuracy <= 1.0);
        CHECK(st.seconds > 0.0);
    }

    CHECK(fs::exists(fs::path(tc.out_dir) / "metrics.jsonl"));
    CHECK(fs::exists(result.last_checkpoint + ".json"));
    CHECK(fs::exists(result.last_checkpoint + ".bin"));
    REQUIRE_FALSE(result.best_checkpoint.empty());
    const PolicyNet best = load_checkpoint(result.best_checkpoint);
    CHECK(best.param_count() == net.param_count());

    // metrics file has one record per epoch
    std::ifstream metrics(fs::path(tc.out_dir) / "metrics.jsonl");
    int lines = 0;
    std::string line;
    while (std::getline(metrics, line)) {
        if (!line.empty()) ++lines;
    }
    CHECK(lines == 2);

    const SplitMetrics sm = evaluate_split(net, data, "val", 2);
    CHECK(sm.count == static_cast<int>(data.val.size()));
    CHECK(sm.accuracy >= 0.0);
    CHECK(sm.accuracy <= 1.0);
    CHECK(sm.mean_length > 0.0);
    CHECK(sm.mean_time_ms > 0.0);
}
