#include "fluidlens/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fluidlens/blur.hpp"

namespace fluidlens {

std::string train_mode_name(TrainMode mode) {
    switch (mode) {
        case TrainMode::kSequence: return "sequence";
        case TrainMode::kMeanImage: return "mean_image";
        case TrainMode::kSiftflowMean: return "siftflow_mean";
        case TrainMode::kFrameBlur: return "frame_blur";
        case TrainMode::kTargetBlur: return "target_blur";
    }
    return "unknown";
}

TrainMode train_mode_from_name(const std::string& name) {
    if (name == "sequence") return TrainMode::kSequence;
    if (name == "mean_image") return TrainMode::kMeanImage;
    if (name == "siftflow_mean") return TrainMode::kSiftflowMean;
    if (name == "frame_blur") return TrainMode::kFrameBlur;
    if (name == "target_blur") return TrainMode::kTargetBlur;
    throw InvalidInput("unknown train mode: " + name);
}

namespace {

bool single_image_mode(TrainMode mode) { return mode != TrainMode::kSequence; }

// Preloaded training material for one dataset entry.
struct EntryData {
    const DatasetEntry* entry = nullptr;
    Image target;
    std::vector<Image> video;  // sequence / frame_blur modes
    Image input_image;         // single-image modes (not target_blur)
};

Image single_input(const DatasetManifest& dataset, const DatasetEntry& entry,
                   TrainMode mode) {
    switch (mode) {
        case TrainMode::kMeanImage:
        case TrainMode::kFrameBlur:
        case TrainMode::kTargetBlur:
            return temporal_mean(load_frames(dataset, entry));
        case TrainMode::kSiftflowMean:
            return siftflow_mean(load_frames(dataset, entry));
        default:
            throw InvalidInput("single_input: sequence mode has no single input");
    }
}

}  // namespace

std::vector<Image> eval_input(const StcnConfig& config,
                              const DatasetManifest& dataset,
                              const DatasetEntry& entry, TrainMode mode) {
    if (mode == TrainMode::kSequence) {
        if (entry.frame_count < config.seq_len) {
            throw InvalidInput("eval_input: video " + entry.id +
                               " shorter than seq_len");
        }
        std::vector<Image> seq;
        for (int i = 0; i < config.seq_len; ++i) {
            seq.push_back(load_frame(dataset, entry, i));
        }
        return seq;
    }
    return {single_input(dataset, entry, mode)};
}

TrainResult train(StcnConfig config, const DatasetManifest& dataset,
                  TrainMode mode, const TrainSchedule& schedule,
                  const std::string& frame_blur_video) {
    if (single_image_mode(mode)) {
        config.seq_len = 1;
    }
    auto train_entries = dataset.split_entries("train");
    auto val_entries = dataset.split_entries("val");
    if (mode == TrainMode::kFrameBlur) {
        // Per-video overfit: restrict to one entry, validate on it too.
        const DatasetEntry* chosen = nullptr;
        for (const DatasetEntry* e : train_entries) {
            if (frame_blur_video.empty() || e->id == frame_blur_video) {
                chosen = e;
                break;
            }
        }
        if (!chosen) {
            throw InvalidInput("train: frame_blur video not found in train split: " +
                               frame_blur_video);
        }
        train_entries = {chosen};
        val_entries = {chosen};
    }
    if (train_entries.empty()) {
        throw InvalidInput("train: empty train split");
    }

    // Normalization constants from the train-split targets.
    std::vector<Image> train_targets;
    for (const DatasetEntry* e : train_entries) {
        train_targets.push_back(load_target(dataset, *e));
    }
    config.mean_rgb = mean_rgb(train_targets);
    if (config.channels != train_targets[0].channels) {
        config.channels = train_targets[0].channels;
    }

    std::vector<EntryData> data(train_entries.size());
    for (std::size_t i = 0; i < train_entries.size(); ++i) {
        data[i].entry = train_entries[i];
        data[i].target = std::move(train_targets[i]);
        if (mode == TrainMode::kSequence || mode == TrainMode::kFrameBlur) {
            data[i].video = load_frames(dataset, *train_entries[i]);
        } else if (mode != TrainMode::kTargetBlur) {
            data[i].input_image = single_input(dataset, *train_entries[i], mode);
        }
    }

    Rng rng(schedule.seed);
    TrainResult result;
    result.params = init_parameters(config, rng.fork_seed());
    OptimState opt = make_optim_state(result.params, schedule.learning_rate);

    auto draw_sample = [&](Rng& r) -> Sample {
        const std::size_t vi = static_cast<std::size_t>(
            r.uniform_int(0, static_cast<std::int64_t>(data.size()) - 1));
        EntryData& d = data[vi];
        switch (mode) {
            case TrainMode::kSequence:
                return augment(d.video, d.target, config.seq_len, r);
            case TrainMode::kMeanImage:
            case TrainMode::kSiftflowMean:
                return augment({d.input_image}, d.target, 1, r);
            case TrainMode::kFrameBlur: {
                const std::int64_t fi = r.uniform_int(
                    0, static_cast<std::int64_t>(d.video.size()) - 1);
                const Image& frame = d.video[fi];
                Sample s = augment({frame}, frame, 1, r);
                s.seq[0] = random_blur(s.seq[0], r).first;
                return s;
            }
            case TrainMode::kTargetBlur: {
                Sample s = augment({d.target}, d.target, 1, r);
                s.seq[0] = random_blur(s.seq[0], r).first;
                return s;
            }
        }
        throw InvalidInput("train: unknown mode");
    };

    auto validate = [&]() -> std::pair<double, double> {  // (l1, psnr)
        double sum_l1 = 0.0;
        double sum_psnr = 0.0;
        int n = 0;
        for (const DatasetEntry* e : val_entries) {
            const std::vector<Image> seq = eval_input(config, dataset, *e, mode);
            const Image out = stcn_forward(config, result.params, seq);
            const Image target = load_target(dataset, *e);
            const MetricsReport m = metrics(out, target);
            sum_l1 += m.l1;
            sum_psnr += std::isinf(m.psnr) ? 100.0 : m.psnr;
            ++n;
        }
        if (n == 0) return {0.0, 0.0};
        return {sum_l1 / n, sum_psnr / n};
    };

    StcnParameters best = result.params;
    double best_psnr = -1.0;
    double last_finite_loss = 0.0;
    for (int step = 1; step <= schedule.steps; ++step) {
        std::vector<Sample> batch;
        batch.reserve(schedule.batch_size);
        for (int b = 0; b < schedule.batch_size; ++b) {
            batch.push_back(draw_sample(rng));
        }
        StcnParameters grads;
        double loss_value = 0.0;
        try {
            loss_value =
                loss_and_gradients(config, result.params, batch, schedule.loss, grads);
        } catch (const DivergenceError&) {
            std::ostringstream msg;
            msg << "train: non-finite loss at step " << step
                << " (last finite loss " << last_finite_loss << ")";
            throw DivergenceError(msg.str());
        }
        last_finite_loss = loss_value;
        result.step_losses.push_back(loss_value);
        clip_gradients(grads, 1.0);
        adam_amsgrad_step(opt, result.params, grads);

        if (step % schedule.val_interval == 0 || step == schedule.steps) {
            const auto [val_l1, val_psnr] = validate();
            result.curve.push_back({step, loss_value, val_l1, val_psnr});
            if (!val_entries.empty() && val_psnr > best_psnr) {
                best_psnr = val_psnr;
                best = result.params;
            }
        }
    }
    if (!val_entries.empty() && best_psnr >= 0.0) {
        result.params = std::move(best);
        result.best_val_psnr = best_psnr;
    }
    result.config = config;
    return result;
}

void write_curves_csv(const std::vector<CurvePoint>& curve,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("write_curves_csv: cannot open " + path);
    }
    out << "step,train_l1,val_l1,val_psnr\n";
    out.precision(10);
    for (const CurvePoint& p : curve) {
        out << p.step << "," << p.train_l1 << "," << p.val_l1 << "," << p.val_psnr
            << "\n";
    }
}

}  // namespace fluidlens
