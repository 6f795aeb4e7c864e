#pragma once

#include <string>
#include <vector>

#include "fluidlens/dataset.hpp"
#include "fluidlens/reconstruct.hpp"
#include "fluidlens/stcn.hpp"

namespace fluidlens {

// sequence      - frame windows in, target out
// mean_image    - temporal mean of all frames as single input image
// siftflow_mean - SIFT-flow mean of all frames as single input image
// frame_blur    - per-video overfit: blurred frame in, original frame out
// target_blur   - blurred target in, target out
enum class TrainMode {
    kSequence,
    kMeanImage,
    kSiftflowMean,
    kFrameBlur,
    kTargetBlur
};

std::string train_mode_name(TrainMode mode);
TrainMode train_mode_from_name(const std::string& name);

struct TrainSchedule {
    int steps = 200;
    int batch_size = 1;
    double learning_rate = 1e-3;  // 1e-4 for full runs
    int val_interval = 50;
    std::uint64_t seed = 0;
    Loss loss = Loss::kL1;
};

struct CurvePoint {
    int step = 0;
    double train_l1 = 0.0;
    double val_l1 = 0.0;
    double val_psnr = 0.0;
};

struct TrainResult {
    StcnConfig config;      // as actually trained (mean_rgb filled in)
    StcnParameters params;  // best validation PSNR (final when no val split)
    std::vector<CurvePoint> curve;
    std::vector<double> step_losses;  // per-step training loss
    double best_val_psnr = 0.0;
};

// Seeded, deterministic loop: augment -> forward -> loss -> clip -> amsgrad.
// Single-image modes force seq_len = 1. frame_blur trains on the single video
// named by frame_blur_video (first train entry when empty); the harness loops
// videos to get one model each.
TrainResult train(StcnConfig config, const DatasetManifest& dataset,
                  TrainMode mode, const TrainSchedule& schedule,
                  const std::string& frame_blur_video = "");

// Mode-appropriate evaluation input for one entry (e.g. first seq_len frames
// for sequence mode, the temporal mean for the deblurring modes).
std::vector<Image> eval_input(const StcnConfig& config,
                              const DatasetManifest& dataset,
                              const DatasetEntry& entry, TrainMode mode);

void write_curves_csv(const std::vector<CurvePoint>& curve,
                      const std::string& path);

}  // namespace fluidlens
