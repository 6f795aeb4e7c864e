#include "fluidlens/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "fluidlens/png_io.hpp"
#include "fluidlens/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fluidlens {

std::vector<const DatasetEntry*> DatasetManifest::split_entries(
    const std::string& split) const {
    std::vector<const DatasetEntry*> out;
    for (const DatasetEntry& e : entries) {
        if (e.split == split) out.push_back(&e);
    }
    return out;
}

WaterSurface random_surface(const WaveRanges& ranges, Rng& rng) {
    WaterSurface surface;
    const int n = static_cast<int>(
        rng.uniform_int(ranges.min_components, ranges.max_components));
    for (int i = 0; i < n; ++i) {
        WaveComponent c;
        c.amplitude = rng.uniform(ranges.amplitude_min, ranges.amplitude_max);
        c.wavelength = rng.uniform(ranges.wavelength_min, ranges.wavelength_max);
        const double angle = rng.uniform(0.0, 6.283185307179586);
        c.dir_x = std::cos(angle);
        c.dir_y = std::sin(angle);
        c.phase = rng.uniform(0.0, 6.283185307179586);
        c.speed = rng.uniform(ranges.speed_min, ranges.speed_max);
        surface.components.push_back(c);
    }
    return surface;
}

std::string frame_filename(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d.png", index);
    return buf;
}

namespace {

json sim_config_to_json(const SimConfig& c) {
    return {{"fps", c.fps},
            {"duration", c.duration},
            {"params", c.params},
            {"waves",
             {{"min_components", c.waves.min_components},
              {"max_components", c.waves.max_components},
              {"amplitude_min", c.waves.amplitude_min},
              {"amplitude_max", c.waves.amplitude_max},
              {"wavelength_min", c.waves.wavelength_min},
              {"wavelength_max", c.waves.wavelength_max},
              {"speed_min", c.waves.speed_min},
              {"speed_max", c.waves.speed_max}}}};
}

SimConfig sim_config_from_json(const json& j) {
    SimConfig c;
    j.at("fps").get_to(c.fps);
    j.at("duration").get_to(c.duration);
    j.at("params").get_to(c.params);
    const json& w = j.at("waves");
    w.at("min_components").get_to(c.waves.min_components);
    w.at("max_components").get_to(c.waves.max_components);
    w.at("amplitude_min").get_to(c.waves.amplitude_min);
    w.at("amplitude_max").get_to(c.waves.amplitude_max);
    w.at("wavelength_min").get_to(c.waves.wavelength_min);
    w.at("wavelength_max").get_to(c.waves.wavelength_max);
    w.at("speed_min").get_to(c.waves.speed_min);
    w.at("speed_max").get_to(c.waves.speed_max);
    return c;
}

std::vector<std::string> assign_splits(std::size_t count,
                                       const SplitFractions& fractions,
                                       Rng& rng) {
    const double total = fractions.train + fractions.val + fractions.test;
    if (std::abs(total - 1.0) > 1e-9) {
        throw InvalidInput("build_dataset: split fractions must sum to 1");
    }
    const std::size_t n_val =
        static_cast<std::size_t>(std::floor(count * fractions.val));
    const std::size_t n_test =
        static_cast<std::size_t>(std::floor(count * fractions.test));
    // floor val/test, remainder goes to train
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = count; i > 1; --i) {
        const std::size_t j =
            static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(order[i - 1], order[j]);
    }
    std::vector<std::string> splits(count, "train");
    for (std::size_t i = 0; i < n_val; ++i) splits[order[i]] = "val";
    for (std::size_t i = 0; i < n_test; ++i) splits[order[n_val + i]] = "test";
    return splits;
}

}  // namespace

void write_manifest(const DatasetManifest& manifest) {
    json j;
    j["seed"] = manifest.seed;
    j["sim"] = sim_config_to_json(manifest.sim);
    json entries = json::array();
    for (const DatasetEntry& e : manifest.entries) {
        entries.push_back({{"id", e.id},
                           {"split", e.split},
                           {"target_path", e.target_path},
                           {"frames_dir", e.frames_dir},
                           {"fps", e.fps},
                           {"frame_count", e.frame_count},
                           {"surface_spec", e.surface},
                           {"sim_params", e.sim_params},
                           {"seed", e.seed}});
    }
    j["entries"] = std::move(entries);
    const fs::path path = fs::path(manifest.root) / "manifest.json";
    std::ofstream out(path);
    if (!out) {
        throw IoError("write_manifest: cannot open " + path.string());
    }
    out << j.dump(2) << "\n";
}

DatasetManifest build_dataset(const std::vector<Image>& targets,
                              const SimConfig& config,
                              const SplitFractions& fractions,
                              std::uint64_t seed, const std::string& out_dir) {
    if (targets.empty()) {
        throw InvalidInput("build_dataset: empty target list");
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("build_dataset: cannot create " + out_dir);
    }
    Rng rng(seed);
    const std::vector<std::string> splits =
        assign_splits(targets.size(), fractions, rng);

    DatasetManifest manifest;
    manifest.root = out_dir;
    manifest.seed = seed;
    manifest.sim = config;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        DatasetEntry entry;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "%05zu", i);
        entry.id = idbuf;
        entry.split = splits[i];
        entry.seed = rng.fork_seed();
        Rng video_rng(entry.seed);
        entry.surface = random_surface(config.waves, video_rng);
        entry.sim_params = config.params;
        entry.fps = config.fps;

        const fs::path dir = fs::path(out_dir) / entry.id;
        const fs::path frames = dir / "frames";
        fs::create_directories(frames, ec);
        if (ec) {
            throw IoError("build_dataset: cannot create " + frames.string());
        }
        entry.target_path = entry.id + "/target.png";
        entry.frames_dir = entry.id + "/frames";
        save_png(targets[i], (dir / "target.png").string());

        const std::vector<Image> video = simulate_video(
            targets[i], entry.surface, config.fps, config.duration, config.params);
        entry.frame_count = static_cast<int>(video.size());
        for (std::size_t k = 0; k < video.size(); ++k) {
            save_png(video[k],
                     (frames / frame_filename(static_cast<int>(k))).string());
        }
        manifest.entries.push_back(std::move(entry));
    }
    write_manifest(manifest);
    return manifest;
}

DatasetManifest read_dataset(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw IoError("read_dataset: cannot open " + manifest_path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw IoError("read_dataset: malformed JSON in " + manifest_path + ": " +
                      e.what());
    }
    DatasetManifest manifest;
    manifest.root = fs::path(manifest_path).parent_path().string();
    try {
        j.at("seed").get_to(manifest.seed);
        manifest.sim = sim_config_from_json(j.at("sim"));
        std::set<std::string> seen_ids;
        for (const json& je : j.at("entries")) {
            DatasetEntry e;
            je.at("id").get_to(e.id);
            je.at("split").get_to(e.split);
            je.at("target_path").get_to(e.target_path);
            je.at("frames_dir").get_to(e.frames_dir);
            je.at("fps").get_to(e.fps);
            je.at("frame_count").get_to(e.frame_count);
            je.at("surface_spec").get_to(e.surface);
            je.at("sim_params").get_to(e.sim_params);
            je.at("seed").get_to(e.seed);
            if (!seen_ids.insert(e.id).second) {
                throw IoError("read_dataset: duplicate id " + e.id);
            }
            if (e.split != "train" && e.split != "val" && e.split != "test") {
                throw IoError("read_dataset: entry " + e.id + " has bad split '" +
                              e.split + "'");
            }
            manifest.entries.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw IoError("read_dataset: invalid manifest " + manifest_path + ": " +
                      e.what());
    }
    // Validate referenced files.
    for (const DatasetEntry& e : manifest.entries) {
        const fs::path target = fs::path(manifest.root) / e.target_path;
        if (!fs::exists(target)) {
            throw IoError("read_dataset: entry " + e.id + " missing target " +
                          target.string());
        }
        const fs::path frames = fs::path(manifest.root) / e.frames_dir;
        for (int k = 0; k < e.frame_count; ++k) {
            if (!fs::exists(frames / frame_filename(k))) {
                throw IoError("read_dataset: entry " + e.id + " missing frame " +
                              frame_filename(k));
            }
        }
    }
    return manifest;
}

Image load_target(const DatasetManifest& manifest, const DatasetEntry& entry) {
    return load_png((fs::path(manifest.root) / entry.target_path).string());
}

Image load_frame(const DatasetManifest& manifest, const DatasetEntry& entry,
                 int index) {
    if (index < 0 || index >= entry.frame_count) {
        throw InvalidInput("load_frame: index out of range for entry " + entry.id);
    }
    return load_png(
        (fs::path(manifest.root) / entry.frames_dir / frame_filename(index))
            .string());
}

std::vector<Image> load_frames(const DatasetManifest& manifest,
                               const DatasetEntry& entry) {
    std::vector<Image> frames;
    frames.reserve(entry.frame_count);
    for (int k = 0; k < entry.frame_count; ++k) {
        frames.push_back(load_frame(manifest, entry, k));
    }
    return frames;
}

}  // namespace fluidlens
