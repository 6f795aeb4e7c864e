#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fluidlens/image.hpp"
#include "fluidlens/lensing.hpp"
#include "fluidlens/rng.hpp"

namespace fluidlens {

// Per-video random wave parameter ranges. These are a calibration choice, not
// taken from any measured spectrum, and are recorded in every manifest.
struct WaveRanges {
    int min_components = 2;
    int max_components = 4;
    double amplitude_min = 0.0005;  // meters
    double amplitude_max = 0.002;
    double wavelength_min = 0.05;  // meters
    double wavelength_max = 0.15;
    double speed_min = 0.05;  // meters/second
    double speed_max = 0.30;
};

struct SimConfig {
    double fps = 25.0;
    double duration = 2.0;  // seconds
    SimParams params;
    WaveRanges waves;
};

struct SplitFractions {
    double train = 0.90;
    double val = 0.05;
    double test = 0.05;
};

struct DatasetEntry {
    std::string id;
    std::string split;  // train | val | test
    std::string target_path;
    std::string frames_dir;
    double fps = 0.0;
    int frame_count = 0;
    WaterSurface surface;
    SimParams sim_params;
    std::uint64_t seed = 0;
};

struct DatasetManifest {
    std::string root;
    std::uint64_t seed = 0;
    SimConfig sim;
    std::vector<DatasetEntry> entries;

    std::vector<const DatasetEntry*> split_entries(const std::string& split) const;
};

// Draws one WaterSurface from the configured ranges.
WaterSurface random_surface(const WaveRanges& ranges, Rng& rng);

// Simulates one video per target, writes targets/frames/manifest under
// out_dir, and returns the manifest. Deterministic in (targets, config, seed).
DatasetManifest build_dataset(const std::vector<Image>& targets,
                              const SimConfig& config,
                              const SplitFractions& fractions,
                              std::uint64_t seed, const std::string& out_dir);

// Loads and validates manifest.json; frames stay on disk until requested.
DatasetManifest read_dataset(const std::string& manifest_path);

Image load_target(const DatasetManifest& manifest, const DatasetEntry& entry);
Image load_frame(const DatasetManifest& manifest, const DatasetEntry& entry,
                 int index);
std::vector<Image> load_frames(const DatasetManifest& manifest,
                               const DatasetEntry& entry);

std::string frame_filename(int index);

void write_manifest(const DatasetManifest& manifest);

}  // namespace fluidlens
