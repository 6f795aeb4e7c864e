#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fluidlens/harness.hpp"
#include "fluidlens/png_io.hpp"
#include "fluidlens/shapes.hpp"

using namespace fluidlens;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

// Small on-disk dataset shared by the harness tests.
struct TestDataset {
    std::string dir = "tmp_harness_dataset";

    TestDataset() {
        fs::remove_all(dir);
        std::vector<Image> targets;
        for (int i = 0; i < 6; ++i) {
            ShapesConfig config;
            config.image_height = 24;
            config.image_width = 24;
            config.seed = 300 + i;
            targets.push_back(generate_shapes(config));
        }
        SimConfig sim;
        sim.fps = 5.0;
        sim.duration = 0.8;  // 4 frames
        SplitFractions fr{0.5, 0.25, 0.25};  // 4 train, 1 val, 1 test
        build_dataset(targets, sim, fr, 123, dir);
    }
    ~TestDataset() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("experiment config parsing") {
    const std::string path = "tmp_config.json";
    {
        std::ofstream out(path);
        out << R"({
            "name": "demo",
            "dataset": "ds/manifest.json",
            "method": "mean",
            "n_frames": [5, "all"],
            "seeds": [1, 2],
            "split": "val",
            "out": "outdir",
            "stcn": {"variant": "stacked", "layers": 2, "blocks": 3,
                     "filters": 16, "seq_len": 4, "mode": "sequence",
                     "train": {"steps": 10, "learning_rate": 0.01, "loss": "mse"}}
        })";
    }
    const ExperimentConfig c = load_experiment_config(path);
    CHECK(c.name == "demo");
    CHECK(c.method == "mean");
    REQUIRE(c.n_frames.size() == 2);
    CHECK(c.n_frames[0] == 5);
    CHECK(!c.n_frames[1].has_value());
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK(c.split == "val");
    CHECK(c.stcn.variant == StcnVariant::kStacked);
    CHECK(c.stcn.layers == 2);
    CHECK(c.stcn.blocks_per_layer == 3);
    CHECK(c.stcn.seq_len == 4);
    CHECK(c.schedule.steps == 10);
    CHECK(c.schedule.learning_rate == 0.01);
    CHECK(c.schedule.loss == Loss::kMse);
    fs::remove(path);
}

TEST_CASE("experiment config errors") {
    CHECK_THROWS_AS(load_experiment_config("missing_config.json"), IoError);
    const std::string path = "tmp_bad_config.json";
    {
        std::ofstream out(path);
        out << "{not json";
    }
    CHECK_THROWS_AS(load_experiment_config(path), InvalidInput);
    {
        std::ofstream out(path);
        out << R"({"name": "x"})";  // missing required keys
    }
    CHECK_THROWS_AS(load_experiment_config(path), InvalidInput);
    {
        std::ofstream out(path);
        out << R"({"name": "x", "dataset": "d", "method": "mean", "seeds": []})";
    }
    CHECK_THROWS_AS(load_experiment_config(path), InvalidInput);
    fs::remove(path);
}

TEST_CASE("results table json round trip with inf psnr and errors") {
    ResultsTable t;
    t.name = "demo";
    t.split = "test";
    t.rows.push_back({"mean_nall", 1, "test", "00000",
                      std::numeric_limits<double>::infinity(), 0.0, 1.5, ""});
    t.rows.push_back({"mean_nall", 2, "test", "00001", 28.5, 3.2, 0.7, "boom"});
    const std::string path = "tmp_results.json";
    write_results_json(t, path);
    const ResultsTable back = read_results_json(path);
    CHECK(back.name == "demo");
    REQUIRE(back.rows.size() == 2);
    CHECK(std::isinf(back.rows[0].psnr));
    CHECK(back.rows[0].error.empty());
    CHECK(back.rows[1].psnr == 28.5);
    CHECK(back.rows[1].error == "boom");
    CHECK(back.has_errors());
    fs::remove(path);
}

TEST_CASE("mean experiment runs and writes deterministic results") {
    TestDataset ds;
    ExperimentConfig config;
    config.name = "stacking";
    config.dataset_manifest = ds.dir + "/manifest.json";
    config.method = "mean";
    config.n_frames = {2, kAllFrames};
    config.seeds = {0};
    config.split = "test";
    config.out_dir = "tmp_harness_out";
    fs::remove_all(config.out_dir);

    const ResultsTable table = run_experiment(config);
    CHECK(!table.has_errors());
    CHECK(table.rows.size() == 2);  // 1 test video x 2 frame counts
    CHECK(table.rows[0].config_id == "mean_n2");
    CHECK(table.rows[1].config_id == "mean_nall");
    CHECK(fs::exists(config.out_dir + "/results.json"));
    CHECK(fs::exists(config.out_dir + "/timings.csv"));
    CHECK(fs::exists(config.out_dir + "/mean_nall/seed_0/" +
                     table.rows[1].video_id + ".png"));

    // Byte-identical results.json on a rerun; timings stay separate so the
    // comparison is meaningful.
    const std::string first = read_file(config.out_dir + "/results.json");
    run_experiment(config);
    CHECK(read_file(config.out_dir + "/results.json") == first);
    fs::remove_all(config.out_dir);
}

TEST_CASE("n larger than the video falls back to all frames") {
    TestDataset ds;
    ExperimentConfig config;
    config.name = "stacking";
    config.dataset_manifest = ds.dir + "/manifest.json";
    config.method = "median";
    config.n_frames = {100};  // videos only have 4 frames
    config.seeds = {0};
    config.split = "test";
    const ResultsTable table = run_experiment(config);
    CHECK(!table.has_errors());
    CHECK(table.rows.size() == 1);
}

TEST_CASE("stcn experiment trains and evaluates end to end") {
    TestDataset ds;
    ExperimentConfig config;
    config.name = "net";
    config.dataset_manifest = ds.dir + "/manifest.json";
    config.method = "stcn";
    config.stcn.layers = 1;
    config.stcn.blocks_per_layer = 1;
    config.stcn.filters = 2;
    config.stcn.seq_len = 2;
    config.train_mode = TrainMode::kSequence;
    config.schedule.steps = 4;
    config.schedule.val_interval = 2;
    config.seeds = {0};
    config.split = "test";
    config.out_dir = "tmp_harness_stcn";
    fs::remove_all(config.out_dir);
    const ResultsTable table = run_experiment(config);
    CHECK(!table.has_errors());
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0].config_id == "stcn_sequence_T2");
    CHECK(fs::exists(config.out_dir + "/stcn_sequence_T2/seed_0/model.stcn"));
    CHECK(fs::exists(config.out_dir + "/stcn_sequence_T2/seed_0/curves.csv"));
    fs::remove_all(config.out_dir);
}

TEST_CASE("unknown method or empty split is rejected") {
    TestDataset ds;
    ExperimentConfig config;
    config.name = "bad";
    config.dataset_manifest = ds.dir + "/manifest.json";
    config.method = "nope";
    config.split = "test";
    CHECK_THROWS_AS(run_experiment(config), InvalidInput);
    config.method = "mean";
    config.split = "other";
    CHECK_THROWS_AS(run_experiment(config), InvalidInput);
}

TEST_CASE("compare report aggregates across seeds and ranks by psnr") {
    ResultsTable t;
    t.name = "x";
    t.split = "test";
    // mean_n1: psnr 20/22 across two seeds; mean_n4: psnr 30/30.
    t.rows.push_back({"mean_n1", 1, "test", "a", 20.0, 10.0, 0.0, ""});
    t.rows.push_back({"mean_n1", 2, "test", "a", 22.0, 9.0, 0.0, ""});
    t.rows.push_back({"mean_n4", 1, "test", "a", 30.0, 5.0, 0.0, ""});
    t.rows.push_back({"mean_n4", 2, "test", "a", 30.0, 5.0, 0.0, ""});
    // Errored rows are excluded from aggregation.
    t.rows.push_back({"mean_n4", 1, "test", "b", 0.0, 0.0, 0.0, "failed"});
    const CompareReport report = compare_report({t});

    CHECK(report.markdown.find("| 1 | mean_n4 |") != std::string::npos);
    CHECK(report.markdown.find("| 2 | mean_n1 |") != std::string::npos);
    CHECK(report.markdown.find("mean_n frame-count monotonicity: pass") !=
          std::string::npos);
    // Per-seed means: 21 +- sqrt(2).
    CHECK(report.markdown.find("21.0000") != std::string::npos);
    CHECK(report.markdown.find("1.4142") != std::string::npos);

    // Breaking monotonicity flips the trend flag.
    ResultsTable bad = t;
    bad.rows[2].psnr = 15.0;
    bad.rows[3].psnr = 15.0;
    const CompareReport report2 = compare_report({bad});
    CHECK(report2.markdown.find("mean_n frame-count monotonicity: fail") !=
          std::string::npos);
}

TEST_CASE("compare report rejects mixed splits and empty input") {
    CHECK_THROWS_AS(compare_report({}), InvalidInput);
    ResultsTable a, b;
    a.split = "test";
    b.split = "val";
    CHECK_THROWS_AS(compare_report({a, b}), InvalidInput);
}
