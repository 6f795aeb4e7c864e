#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fluidlens/dataset.hpp"
#include "fluidlens/reconstruct.hpp"
#include "fluidlens/train.hpp"

namespace fluidlens {

// mean | median | siftflow_mean | stcn
struct ExperimentConfig {
    std::string name;
    std::string dataset_manifest;
    std::string method;
    std::vector<std::optional<int>> n_frames = {kAllFrames};  // stacking methods
    FlowParams flow_params;
    StcnConfig stcn;
    TrainMode train_mode = TrainMode::kSequence;
    TrainSchedule schedule;
    std::vector<std::uint64_t> seeds = {0};
    std::string split = "test";
    std::string out_dir;
};

ExperimentConfig load_experiment_config(const std::string& path);

struct ResultRow {
    std::string config_id;
    std::uint64_t seed = 0;
    std::string split;
    std::string video_id;
    double psnr = 0.0;
    double l1 = 0.0;
    double runtime_seconds = 0.0;
    std::string error;  // nonempty when this row failed
};

struct ResultsTable {
    std::string name;
    std::string split;
    std::vector<ResultRow> rows;

    bool has_errors() const;
};

// Runs the configured method over the chosen split for every seed, writing
// per-video outputs plus results.json under out_dir. Timing goes to a
// separate timings.csv so results.json stays byte-reproducible.
ResultsTable run_experiment(const ExperimentConfig& config);

void write_results_json(const ResultsTable& table, const std::string& path);
ResultsTable read_results_json(const std::string& path);

struct CompareReport {
    std::string markdown;
    std::string json;
};

// Per-config mean +- stddev PSNR/L1 across seeds, ranked, plus trend flags
// (frame-count monotonicity, sequence-length direction).
CompareReport compare_report(const std::vector<ResultsTable>& tables);

}  // namespace fluidlens
