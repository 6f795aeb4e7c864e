#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fluidlens/blur.hpp"
#include "fluidlens/dataset.hpp"
#include "fluidlens/harness.hpp"
#include "fluidlens/png_io.hpp"
#include "fluidlens/reconstruct.hpp"
#include "fluidlens/serialize.hpp"
#include "fluidlens/shapes.hpp"
#include "fluidlens/train.hpp"

namespace fs = std::filesystem;
using namespace fluidlens;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::optional<int> parse_n_arg(const std::string& s) {
    if (s == "all") return kAllFrames;
    return std::stoi(s);
}

int cmd_gen_shapes(const std::string& out_dir, int count, int height, int width,
                   std::uint64_t seed) {
    fs::create_directories(out_dir);
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        ShapesConfig config;
        config.image_height = height;
        config.image_width = width;
        config.seed = rng.fork_seed();
        const Image img = generate_shapes(config);
        char name[32];
        std::snprintf(name, sizeof(name), "shapes_%05d.png", i);
        save_png(img, (fs::path(out_dir) / name).string());
    }
    std::cout << "wrote " << count << " shape images to " << out_dir << "\n";
    return kExitOk;
}

int cmd_build_dataset(const std::string& config_path, std::uint64_t seed,
                      const std::string& out_dir) {
    std::ifstream in(config_path);
    if (!in) {
        throw InvalidInput("cannot open config " + config_path);
    }
    json j;
    in >> j;
    const int count = j.value("count", 20);
    const int height = j.value("image_height", 128);
    const int width = j.value("image_width", 128);
    SimConfig sim;
    if (j.contains("sim")) {
        const json& s = j.at("sim");
        sim.fps = s.value("fps", sim.fps);
        sim.duration = s.value("duration", sim.duration);
        if (s.contains("params")) s.at("params").get_to(sim.params);
    }
    SplitFractions fractions;
    if (j.contains("fractions")) {
        const json& f = j.at("fractions");
        fractions.train = f.value("train", fractions.train);
        fractions.val = f.value("val", fractions.val);
        fractions.test = f.value("test", fractions.test);
    }
    Rng rng(seed);
    std::vector<Image> targets;
    for (int i = 0; i < count; ++i) {
        ShapesConfig sc;
        sc.image_height = height;
        sc.image_width = width;
        sc.seed = rng.fork_seed();
        targets.push_back(generate_shapes(sc));
    }
    const DatasetManifest manifest =
        build_dataset(targets, sim, fractions, rng.fork_seed(), out_dir);
    std::cout << "built dataset with " << manifest.entries.size()
              << " videos at " << out_dir << "\n";
    return kExitOk;
}

int cmd_simulate(const std::string& target_path, const std::string& out_dir,
                 std::uint64_t seed, double fps, double duration) {
    const Image target = load_png(target_path);
    fs::create_directories(out_dir);
    Rng rng(seed);
    const WaterSurface surface = random_surface(WaveRanges{}, rng);
    const SimParams params;
    const std::vector<Image> frames =
        simulate_video(target, surface, fps, duration, params);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        save_png(frames[i],
                 (fs::path(out_dir) / frame_filename(static_cast<int>(i))).string());
    }
    json j = {{"seed", seed},     {"fps", fps},
              {"duration", duration}, {"frame_count", frames.size()},
              {"surface", surface},   {"params", params}};
    std::ofstream sidecar(fs::path(out_dir) / "simulation.json");
    sidecar << j.dump(2) << "\n";
    std::cout << "wrote " << frames.size() << " frames to " << out_dir << "\n";
    return kExitOk;
}

int cmd_reconstruct(const std::string& manifest_path, const std::string& method,
                    const std::string& n_arg, const std::string& split,
                    const std::string& out_dir) {
    const DatasetManifest manifest = read_dataset(manifest_path);
    const std::optional<int> n = parse_n_arg(n_arg);
    const auto entries = manifest.split_entries(split);
    if (entries.empty()) {
        throw InvalidInput("split '" + split + "' is empty");
    }
    fs::create_directories(out_dir);
    const FlowParams flow_params;
    for (const DatasetEntry* entry : entries) {
        const std::vector<Image> frames = load_frames(manifest, *entry);
        Image out;
        if (method == "mean") {
            out = temporal_mean(frames, n);
        } else if (method == "median") {
            out = temporal_median(frames, n);
        } else if (method == "siftflow_mean") {
            out = siftflow_mean(frames, n, flow_params);
        } else {
            throw InvalidInput("unknown method '" + method + "'");
        }
        const Image target = load_target(manifest, *entry);
        const MetricsReport m = metrics(out, target);
        save_png(out, (fs::path(out_dir) / (entry->id + ".png")).string());
        json sidecar = {{"method", method},
                        {"n", n.has_value() ? json(*n) : json("all")},
                        {"params",
                         {{"search_radius", flow_params.search_radius},
                          {"levels", flow_params.levels},
                          {"smoothness_weight", flow_params.smoothness_weight},
                          {"truncation", flow_params.truncation}}},
                        {"psnr", std::isinf(m.psnr) ? json("inf") : json(m.psnr)},
                        {"l1", m.l1}};
        std::ofstream sj(fs::path(out_dir) / (entry->id + ".json"));
        sj << sidecar.dump(2) << "\n";
        std::cout << entry->id << " psnr=" << m.psnr << " l1=" << m.l1 << "\n";
    }
    return kExitOk;
}

int cmd_blur(const std::string& input, const std::string& method, int kernel,
             double std_dev, double sigma_color, const std::string& output) {
    const Image img = load_png(input);
    BlurSpec spec;
    spec.kernel = kernel;
    if (method == "box") {
        spec.method = BlurMethod::kBox;
    } else if (method == "gaussian") {
        spec.method = BlurMethod::kGaussian;
        spec.gaussian_std = std_dev;
    } else if (method == "bilateral") {
        spec.method = BlurMethod::kBilateral;
        spec.bilateral_sigma = sigma_color;
    } else {
        throw InvalidInput("unknown blur method '" + method + "'");
    }
    save_png(apply_blur(img, spec), output);
    std::ofstream sidecar(output + ".json");
    sidecar << spec.to_json() << "\n";
    return kExitOk;
}

int cmd_train(const std::string& config_path, std::uint64_t seed,
              const std::string& out_dir) {
    ExperimentConfig config = load_experiment_config(config_path);
    const DatasetManifest manifest = read_dataset(config.dataset_manifest);
    TrainSchedule schedule = config.schedule;
    schedule.seed = seed;
    const TrainResult result =
        train(config.stcn, manifest, config.train_mode, schedule);
    fs::create_directories(out_dir);
    save_parameters(result.config, result.params,
                    (fs::path(out_dir) / "model.stcn").string());
    write_curves_csv(result.curve, (fs::path(out_dir) / "curves.csv").string());
    std::cout << "trained " << config.name << ", best val psnr "
              << result.best_val_psnr << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& manifest_path, const std::string& model_path,
             const std::string& mode_name, const std::string& split,
             const std::string& out_dir) {
    const DatasetManifest manifest = read_dataset(manifest_path);
    const auto [config, params] = load_parameters(model_path);
    const TrainMode mode = train_mode_from_name(mode_name);
    const auto entries = manifest.split_entries(split);
    if (entries.empty()) {
        throw InvalidInput("split '" + split + "' is empty");
    }
    fs::create_directories(out_dir);
    json rows = json::array();
    for (const DatasetEntry* entry : entries) {
        const auto seq = eval_input(config, manifest, *entry, mode);
        const Image out = stcn_forward(config, params, seq);
        const Image target = load_target(manifest, *entry);
        const MetricsReport m = metrics(out, target);
        save_png(out, (fs::path(out_dir) / (entry->id + ".png")).string());
        rows.push_back({{"video_id", entry->id},
                        {"psnr", std::isinf(m.psnr) ? json("inf") : json(m.psnr)},
                        {"l1", m.l1}});
        std::cout << entry->id << " psnr=" << m.psnr << " l1=" << m.l1 << "\n";
    }
    std::ofstream out_json(fs::path(out_dir) / "eval.json");
    out_json << json({{"split", split}, {"rows", rows}}).dump(2) << "\n";
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& result_paths,
               const std::string& out_dir) {
    std::vector<ResultsTable> tables;
    for (const std::string& p : result_paths) {
        tables.push_back(read_results_json(p));
    }
    const CompareReport report = compare_report(tables);
    fs::create_directories(out_dir);
    std::ofstream md(fs::path(out_dir) / "report.md");
    md << report.markdown;
    std::ofstream js(fs::path(out_dir) / "report.json");
    js << report.json << "\n";
    std::cout << report.markdown;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fluid lensing simulation and reconstruction toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::string config_path;
    std::string split = "test";

    auto* gen = app.add_subcommand("gen-shapes", "generate random shape targets");
    int gen_count = 10, gen_h = 128, gen_w = 128;
    gen->add_option("--count", gen_count);
    gen->add_option("--height", gen_h);
    gen->add_option("--width", gen_w);
    gen->add_option("--seed", seed);
    gen->add_option("--out", out_dir);

    auto* build = app.add_subcommand("build-dataset",
                                     "simulate videos for generated targets");
    build->add_option("--config", config_path)->required();
    build->add_option("--seed", seed);
    build->add_option("--out", out_dir);

    auto* sim = app.add_subcommand("simulate", "simulate one distorted video");
    std::string target_path;
    double fps = 25.0, duration = 2.0;
    sim->add_option("--target", target_path)->required();
    sim->add_option("--fps", fps);
    sim->add_option("--duration", duration);
    sim->add_option("--seed", seed);
    sim->add_option("--out", out_dir);

    auto* rec = app.add_subcommand("reconstruct", "stacking reconstruction");
    std::string manifest_path, method = "mean", n_arg = "all";
    rec->add_option("--dataset", manifest_path)->required();
    rec->add_option("--method", method);
    rec->add_option("--n", n_arg);
    rec->add_option("--split", split);
    rec->add_option("--out", out_dir);

    auto* blur = app.add_subcommand("blur", "blur a single image");
    std::string blur_in, blur_out = "blurred.png", blur_method = "box";
    int blur_kernel = 3;
    double blur_std = 0.0, blur_sigma = 0.0;
    blur->add_option("--input", blur_in)->required();
    blur->add_option("--method", blur_method);
    blur->add_option("--kernel", blur_kernel);
    blur->add_option("--std", blur_std);
    blur->add_option("--sigma-color", blur_sigma);
    blur->add_option("--output", blur_out);

    auto* tr = app.add_subcommand("train", "train an STCN model");
    tr->add_option("--config", config_path)->required();
    tr->add_option("--seed", seed);
    tr->add_option("--out", out_dir);

    auto* ev = app.add_subcommand("eval", "evaluate a trained model");
    std::string model_path, mode_name = "sequence";
    ev->add_option("--dataset", manifest_path)->required();
    ev->add_option("--model", model_path)->required();
    ev->add_option("--mode", mode_name);
    ev->add_option("--split", split);
    ev->add_option("--out", out_dir);

    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("--config", config_path)->required();

    auto* rep = app.add_subcommand("report", "aggregate results tables");
    std::vector<std::string> result_paths;
    rep->add_option("--results", result_paths)->required();
    rep->add_option("--out", out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (gen->parsed()) return cmd_gen_shapes(out_dir, gen_count, gen_h, gen_w, seed);
        if (build->parsed()) return cmd_build_dataset(config_path, seed, out_dir);
        if (sim->parsed()) return cmd_simulate(target_path, out_dir, seed, fps, duration);
        if (rec->parsed()) return cmd_reconstruct(manifest_path, method, n_arg, split, out_dir);
        if (blur->parsed()) return cmd_blur(blur_in, blur_method, blur_kernel, blur_std, blur_sigma, blur_out);
        if (tr->parsed()) return cmd_train(config_path, seed, out_dir);
        if (ev->parsed()) return cmd_eval(manifest_path, model_path, mode_name, split, out_dir);
        if (run->parsed()) {
            const ExperimentConfig config = load_experiment_config(config_path);
            const ResultsTable table = run_experiment(config);
            return table.has_errors() ? kExitRuntime : kExitOk;
        }
        if (rep->parsed()) return cmd_report(result_paths, out_dir);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const IoError& e) {
        // Unreadable inputs are argument mistakes, not mid-run failures.
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
