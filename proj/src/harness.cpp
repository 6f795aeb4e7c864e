#include "fluidlens/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "fluidlens/png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fluidlens {

namespace {

std::optional<int> parse_n(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "all") return kAllFrames;
        throw InvalidInput("experiment config: n_frames entries are ints or \"all\"");
    }
    return j.get<int>();
}

std::string n_label(std::optional<int> n) {
    return n.has_value() ? std::to_string(*n) : "all";
}

Loss loss_from_name(const std::string& name) {
    if (name == "l1") return Loss::kL1;
    if (name == "mse") return Loss::kMse;
    if (name == "rmse") return Loss::kRmse;
    throw InvalidInput("unknown loss: " + name);
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("load_experiment_config: cannot open " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidInput("experiment config: malformed JSON: " +
                           std::string(e.what()));
    }
    ExperimentConfig c;
    try {
        j.at("name").get_to(c.name);
        j.at("dataset").get_to(c.dataset_manifest);
        j.at("method").get_to(c.method);
        if (j.contains("n_frames")) {
            c.n_frames.clear();
            for (const json& n : j.at("n_frames")) c.n_frames.push_back(parse_n(n));
        }
        if (j.contains("flow")) {
            const json& f = j.at("flow");
            if (f.contains("search_radius")) f.at("search_radius").get_to(c.flow_params.search_radius);
            if (f.contains("levels")) f.at("levels").get_to(c.flow_params.levels);
            if (f.contains("smoothness_weight")) f.at("smoothness_weight").get_to(c.flow_params.smoothness_weight);
            if (f.contains("truncation")) f.at("truncation").get_to(c.flow_params.truncation);
        }
        if (j.contains("stcn")) {
            const json& s = j.at("stcn");
            if (s.contains("variant")) {
                c.stcn.variant = s.at("variant").get<std::string>() == "stacked"
                                     ? StcnVariant::kStacked
                                     : StcnVariant::kNonStacked;
            }
            if (s.contains("layers")) s.at("layers").get_to(c.stcn.layers);
            if (s.contains("blocks")) s.at("blocks").get_to(c.stcn.blocks_per_layer);
            if (s.contains("filters")) s.at("filters").get_to(c.stcn.filters);
            if (s.contains("seq_len")) s.at("seq_len").get_to(c.stcn.seq_len);
            if (s.contains("mode")) c.train_mode = train_mode_from_name(s.at("mode"));
            if (s.contains("train")) {
                const json& t = s.at("train");
                if (t.contains("steps")) t.at("steps").get_to(c.schedule.steps);
                if (t.contains("batch_size")) t.at("batch_size").get_to(c.schedule.batch_size);
                if (t.contains("learning_rate")) t.at("learning_rate").get_to(c.schedule.learning_rate);
                if (t.contains("val_interval")) t.at("val_interval").get_to(c.schedule.val_interval);
                if (t.contains("loss")) c.schedule.loss = loss_from_name(t.at("loss"));
            }
        }
        if (j.contains("seeds")) {
            c.seeds.clear();
            for (const json& s : j.at("seeds")) c.seeds.push_back(s.get<std::uint64_t>());
        }
        if (j.contains("split")) j.at("split").get_to(c.split);
        if (j.contains("out")) j.at("out").get_to(c.out_dir);
    } catch (const json::exception& e) {
        throw InvalidInput("experiment config: " + std::string(e.what()));
    }
    if (c.seeds.empty()) {
        throw InvalidInput("experiment config: seeds must be nonempty");
    }
    return c;
}

bool ResultsTable::has_errors() const {
    return std::any_of(rows.begin(), rows.end(),
                       [](const ResultRow& r) { return !r.error.empty(); });
}

ResultsTable run_experiment(const ExperimentConfig& config) {
    const DatasetManifest manifest = read_dataset(config.dataset_manifest);
    const auto entries = manifest.split_entries(config.split);
    if (entries.empty()) {
        throw InvalidInput("run_experiment: empty split '" + config.split + "'");
    }
    if (!config.out_dir.empty()) {
        fs::create_directories(config.out_dir);
    }

    ResultsTable table;
    table.name = config.name;
    table.split = config.split;

    auto evaluate_row = [&](const std::string& config_id, std::uint64_t seed,
                            const DatasetEntry& entry, auto&& produce) {
        ResultRow row;
        row.config_id = config_id;
        row.seed = seed;
        row.split = config.split;
        row.video_id = entry.id;
        const auto start = std::chrono::steady_clock::now();
        try {
            const Image out = produce();
            const Image target = load_target(manifest, entry);
            const MetricsReport m = metrics(out, target);
            row.psnr = m.psnr;
            row.l1 = m.l1;
            if (!config.out_dir.empty()) {
                const fs::path dir = fs::path(config.out_dir) / config_id /
                                     ("seed_" + std::to_string(seed));
                fs::create_directories(dir);
                save_png(out, (dir / (entry.id + ".png")).string());
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        row.runtime_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        table.rows.push_back(std::move(row));
    };

    if (config.method == "mean" || config.method == "median" ||
        config.method == "siftflow_mean") {
        for (std::uint64_t seed : config.seeds) {
            for (std::optional<int> n : config.n_frames) {
                const std::string config_id = config.method + "_n" + n_label(n);
                for (const DatasetEntry* entry : entries) {
                    evaluate_row(config_id, seed, *entry, [&]() {
                        const std::vector<Image> frames = load_frames(manifest, *entry);
                        const std::optional<int> use_n =
                            n.has_value() && *n > entry->frame_count
                                ? kAllFrames
                                : n;
                        if (config.method == "mean") return temporal_mean(frames, use_n);
                        if (config.method == "median") return temporal_median(frames, use_n);
                        return siftflow_mean(frames, use_n, config.flow_params);
                    });
                }
            }
        }
    } else if (config.method == "stcn") {
        for (std::uint64_t seed : config.seeds) {
            const std::string config_id =
                "stcn_" + train_mode_name(config.train_mode) + "_T" +
                std::to_string(config.train_mode == TrainMode::kSequence
                                   ? config.stcn.seq_len
                                   : 1);
            if (config.train_mode == TrainMode::kFrameBlur) {
                // One model per video.
                for (const DatasetEntry* entry : entries) {
                    evaluate_row(config_id, seed, *entry, [&]() {
                        TrainSchedule sched = config.schedule;
                        sched.seed = seed;
                        const TrainResult r = train(config.stcn, manifest,
                                                    config.train_mode, sched,
                                                    entry->id);
                        const auto seq =
                            eval_input(r.config, manifest, *entry, config.train_mode);
                        return stcn_forward(r.config, r.params, seq);
                    });
                }
            } else {
                TrainSchedule sched = config.schedule;
                sched.seed = seed;
                TrainResult r;
                bool trained = false;
                std::string train_error;
                try {
                    r = train(config.stcn, manifest, config.train_mode, sched);
                    trained = true;
                    if (!config.out_dir.empty()) {
                        const fs::path dir =
                            fs::path(config.out_dir) / config_id /
                            ("seed_" + std::to_string(seed));
                        fs::create_directories(dir);
                        save_parameters(r.config, r.params,
                                        (dir / "model.stcn").string());
                        write_curves_csv(r.curve, (dir / "curves.csv").string());
                    }
                } catch (const std::exception& e) {
                    train_error = e.what();
                }
                for (const DatasetEntry* entry : entries) {
                    if (!trained) {
                        ResultRow row;
                        row.config_id = config_id;
                        row.seed = seed;
                        row.split = config.split;
                        row.video_id = entry->id;
                        row.error = train_error;
                        table.rows.push_back(std::move(row));
                        continue;
                    }
                    evaluate_row(config_id, seed, *entry, [&]() {
                        const auto seq =
                            eval_input(r.config, manifest, *entry, config.train_mode);
                        return stcn_forward(r.config, r.params, seq);
                    });
                }
            }
        }
    } else {
        throw InvalidInput("run_experiment: unknown method '" + config.method + "'");
    }

    // Deterministic row order: (config id, seed, video id).
    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [](const ResultRow& a, const ResultRow& b) {
                         return std::tie(a.config_id, a.seed, a.video_id) <
                                std::tie(b.config_id, b.seed, b.video_id);
                     });
    if (!config.out_dir.empty()) {
        write_results_json(table,
                           (fs::path(config.out_dir) / "results.json").string());
        std::ofstream timings(fs::path(config.out_dir) / "timings.csv");
        timings << "config_id,seed,video_id,runtime_seconds\n";
        for (const ResultRow& r : table.rows) {
            timings << r.config_id << "," << r.seed << "," << r.video_id << ","
                    << r.runtime_seconds << "\n";
        }
    }
    return table;
}

namespace {

json row_to_json(const ResultRow& r) {
    json j = {{"config_id", r.config_id}, {"seed", r.seed},
              {"split", r.split},         {"video_id", r.video_id},
              {"l1", r.l1}};
    if (std::isinf(r.psnr)) {
        j["psnr"] = "inf";
    } else {
        j["psnr"] = r.psnr;
    }
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

ResultRow row_from_json(const json& j) {
    ResultRow r;
    j.at("config_id").get_to(r.config_id);
    j.at("seed").get_to(r.seed);
    j.at("split").get_to(r.split);
    j.at("video_id").get_to(r.video_id);
    j.at("l1").get_to(r.l1);
    if (j.at("psnr").is_string()) {
        r.psnr = std::numeric_limits<double>::infinity();
    } else {
        j.at("psnr").get_to(r.psnr);
    }
    if (j.contains("error")) j.at("error").get_to(r.error);
    return r;
}

}  // namespace

void write_results_json(const ResultsTable& table, const std::string& path) {
    json j;
    j["name"] = table.name;
    j["split"] = table.split;
    json rows = json::array();
    for (const ResultRow& r : table.rows) rows.push_back(row_to_json(r));
    j["rows"] = std::move(rows);
    std::ofstream out(path);
    if (!out) {
        throw IoError("write_results_json: cannot open " + path);
    }
    out << j.dump(2) << "\n";
}

ResultsTable read_results_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("read_results_json: cannot open " + path);
    }
    json j;
    in >> j;
    ResultsTable t;
    j.at("name").get_to(t.name);
    j.at("split").get_to(t.split);
    for (const json& r : j.at("rows")) t.rows.push_back(row_from_json(r));
    return t;
}

namespace {

struct Aggregate {
    double psnr_mean = 0.0;
    double psnr_std = 0.0;
    double l1_mean = 0.0;
    double l1_std = 0.0;
    int seeds = 0;
};

double finite_psnr(double p) { return std::isinf(p) ? 100.0 : p; }

}  // namespace

CompareReport compare_report(const std::vector<ResultsTable>& tables) {
    if (tables.empty()) {
        throw InvalidInput("compare_report: no tables");
    }
    const std::string& split = tables.front().split;
    for (const ResultsTable& t : tables) {
        if (t.split != split) {
            throw InvalidInput("compare_report: tables come from different splits");
        }
    }
    // Per (config_id, seed): mean over videos. Then stats across seeds.
    std::map<std::string, std::map<std::uint64_t, std::pair<double, double>>> per_seed;
    std::map<std::string, std::map<std::uint64_t, int>> counts;
    for (const ResultsTable& t : tables) {
        for (const ResultRow& r : t.rows) {
            if (!r.error.empty()) continue;
            auto& acc = per_seed[r.config_id][r.seed];
            acc.first += finite_psnr(r.psnr);
            acc.second += r.l1;
            counts[r.config_id][r.seed] += 1;
        }
    }
    std::map<std::string, Aggregate> aggregates;
    for (auto& [config_id, seeds] : per_seed) {
        std::vector<double> psnrs, l1s;
        for (auto& [seed, acc] : seeds) {
            const int n = counts[config_id][seed];
            psnrs.push_back(acc.first / n);
            l1s.push_back(acc.second / n);
        }
        Aggregate a;
        a.seeds = static_cast<int>(psnrs.size());
        for (double v : psnrs) a.psnr_mean += v;
        for (double v : l1s) a.l1_mean += v;
        a.psnr_mean /= a.seeds;
        a.l1_mean /= a.seeds;
        for (double v : psnrs) a.psnr_std += (v - a.psnr_mean) * (v - a.psnr_mean);
        for (double v : l1s) a.l1_std += (v - a.l1_mean) * (v - a.l1_mean);
        a.psnr_std = a.seeds > 1 ? std::sqrt(a.psnr_std / (a.seeds - 1)) : 0.0;
        a.l1_std = a.seeds > 1 ? std::sqrt(a.l1_std / (a.seeds - 1)) : 0.0;
        aggregates[config_id] = a;
    }

    // Ranked by mean PSNR, descending.
    std::vector<std::pair<std::string, Aggregate>> ranked(aggregates.begin(),
                                                          aggregates.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second.psnr_mean > b.second.psnr_mean;
    });

    // Trend flags over config-id families of the form <method>_n<k> and
    // stcn_<mode>_T<k>.
    auto family_trend = [&](const std::string& prefix, const std::string& axis)
        -> std::optional<std::pair<std::string, bool>> {
        std::vector<std::pair<int, double>> points;
        for (const auto& [id, agg] : aggregates) {
            if (id.rfind(prefix, 0) != 0) continue;
            const std::string suffix = id.substr(prefix.size());
            int value = -1;
            if (suffix == "all") {
                value = std::numeric_limits<int>::max();
            } else {
                try {
                    value = std::stoi(suffix);
                } catch (...) {
                    continue;
                }
            }
            points.emplace_back(value, agg.psnr_mean);
        }
        if (points.size() < 2) return std::nullopt;
        std::sort(points.begin(), points.end());
        bool monotone = true;
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (points[i].second + 1e-12 < points[i - 1].second) monotone = false;
        }
        return std::make_pair(prefix + axis, monotone);
    };

    std::vector<std::pair<std::string, bool>> trends;
    for (const std::string& prefix : {std::string("mean_n"),
                                      std::string("median_n"),
                                      std::string("siftflow_mean_n")}) {
        if (auto t = family_trend(prefix, " frame-count monotonicity")) {
            trends.push_back(*t);
        }
    }
    if (auto t = family_trend("stcn_sequence_T", " sequence-length direction")) {
        trends.push_back(*t);
    }

    std::ostringstream md;
    md << "# Comparison report (" << split << " split)\n\n";
    md << "| rank | config | PSNR (dB) | L1 | seeds |\n";
    md << "|------|--------|-----------|----|-------|\n";
    md.precision(4);
    md << std::fixed;
    int rank = 1;
    for (const auto& [id, a] : ranked) {
        md << "| " << rank++ << " | " << id << " | " << a.psnr_mean << " ± "
           << a.psnr_std << " | " << a.l1_mean << " ± " << a.l1_std << " | "
           << a.seeds << " |\n";
    }
    if (!trends.empty()) {
        md << "\n## Trend checks\n\n";
        for (const auto& [name, ok] : trends) {
            md << "- " << name << ": " << (ok ? "pass" : "fail") << "\n";
        }
    }

    json j;
    j["split"] = split;
    json jc = json::array();
    for (const auto& [id, a] : ranked) {
        jc.push_back({{"config_id", id},
                      {"psnr_mean", a.psnr_mean},
                      {"psnr_std", a.psnr_std},
                      {"l1_mean", a.l1_mean},
                      {"l1_std", a.l1_std},
                      {"seeds", a.seeds}});
    }
    j["configs"] = std::move(jc);
    json jt = json::array();
    for (const auto& [name, ok] : trends) {
        jt.push_back({{"name", name}, {"pass", ok}});
    }
    j["trends"] = std::move(jt);

    CompareReport report;
    report.markdown = md.str();
    report.json = j.dump(2);
    return report;
}

}  // namespace fluidlens
