#include "fluidlens/stcn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace fluidlens {

namespace {

std::size_t offset4(const std::vector<int>& shape, int c, int t, int y, int x) {
    return ((static_cast<std::size_t>(c) * shape[1] + t) * shape[2] + y) *
               shape[3] +
           x;
}

void check_input_shape(const Tensor& input, const Tensor& weights) {
    if (input.shape.size() != 4 || weights.shape.size() != 5) {
        throw ShapeError("conv_nd: expected input rank 4 and weights rank 5");
    }
    if (weights.shape[1] != input.shape[0]) {
        throw ShapeError("conv_nd: input channels do not match weights");
    }
    for (int axis = 2; axis < 5; ++axis) {
        if (weights.shape[axis] != 1 && weights.shape[axis] != 3) {
            throw ShapeError("conv_nd: kernel extents must be 1 or 3");
        }
    }
}

}  // namespace

Tensor conv_nd(const Tensor& input, const Tensor& weights,
               const std::vector<double>& bias, int dilation) {
    check_input_shape(input, weights);
    const int cin = input.shape[0];
    const int td = input.shape[1];
    const int h = input.shape[2];
    const int w = input.shape[3];
    const int cout = weights.shape[0];
    const int kt = weights.shape[2];
    const int kh = weights.shape[3];
    const int kw = weights.shape[4];
    if (static_cast<int>(bias.size()) != cout) {
        throw ShapeError("conv_nd: bias size does not match output channels");
    }

    Tensor out({cout, td, h, w});
    const std::size_t plane = static_cast<std::size_t>(td) * h * w;
    for (int co = 0; co < cout; ++co) {
        std::fill(out.data.begin() + co * plane,
                  out.data.begin() + (co + 1) * plane, bias[co]);
    }
    const std::size_t ktap = static_cast<std::size_t>(kt) * kh * kw;
    for (int co = 0; co < cout; ++co) {
        for (int ci = 0; ci < cin; ++ci) {
            const double* wbase =
                &weights.data[(static_cast<std::size_t>(co) * cin + ci) * ktap];
            for (int it = 0; it < kt; ++it) {
                const int dt = kt == 3 ? (it - 1) * dilation : 0;
                const int t0 = std::max(0, -dt);
                const int t1 = std::min(td, td - dt);
                for (int iy = 0; iy < kh; ++iy) {
                    const int dy = kh == 3 ? (iy - 1) * dilation : 0;
                    const int y0 = std::max(0, -dy);
                    const int y1 = std::min(h, h - dy);
                    for (int ix = 0; ix < kw; ++ix) {
                        const int dx = kw == 3 ? (ix - 1) * dilation : 0;
                        const int x0 = std::max(0, -dx);
                        const int x1 = std::min(w, w - dx);
                        const double wv = wbase[(it * kh + iy) * kw + ix];
                        if (x1 <= x0 || y1 <= y0 || t1 <= t0) continue;
                        for (int t = t0; t < t1; ++t) {
                            for (int y = y0; y < y1; ++y) {
                                double* dst =
                                    &out.data[offset4(out.shape, co, t, y, x0)];
                                const double* src = &input.data[offset4(
                                    input.shape, ci, t + dt, y + dy, x0 + dx)];
                                const int len = x1 - x0;
                                for (int x = 0; x < len; ++x) {
                                    dst[x] += wv * src[x];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

void conv_nd_backward(const Tensor& input, const Tensor& weights,
                      const Tensor& grad_out, int dilation, Tensor& grad_input,
                      Tensor& grad_weights, std::vector<double>& grad_bias) {
    check_input_shape(input, weights);
    const int cin = input.shape[0];
    const int td = input.shape[1];
    const int h = input.shape[2];
    const int w = input.shape[3];
    const int cout = weights.shape[0];
    const int kt = weights.shape[2];
    const int kh = weights.shape[3];
    const int kw = weights.shape[4];

    // Accumulating: existing buffers of the right shape are added into.
    if (grad_input.shape != input.shape) grad_input = Tensor(input.shape);
    if (grad_weights.shape != weights.shape) grad_weights = Tensor(weights.shape);
    if (grad_bias.size() != static_cast<std::size_t>(cout)) {
        grad_bias.assign(cout, 0.0);
    }

    const std::size_t plane = static_cast<std::size_t>(td) * h * w;
    for (int co = 0; co < cout; ++co) {
        double s = 0.0;
        const double* g = &grad_out.data[co * plane];
        for (std::size_t i = 0; i < plane; ++i) s += g[i];
        grad_bias[co] += s;
    }
    const std::size_t ktap = static_cast<std::size_t>(kt) * kh * kw;
    for (int co = 0; co < cout; ++co) {
        for (int ci = 0; ci < cin; ++ci) {
            const std::size_t wbase =
                (static_cast<std::size_t>(co) * cin + ci) * ktap;
            for (int it = 0; it < kt; ++it) {
                const int dt = kt == 3 ? (it - 1) * dilation : 0;
                const int t0 = std::max(0, -dt);
                const int t1 = std::min(td, td - dt);
                for (int iy = 0; iy < kh; ++iy) {
                    const int dy = kh == 3 ? (iy - 1) * dilation : 0;
                    const int y0 = std::max(0, -dy);
                    const int y1 = std::min(h, h - dy);
                    for (int ix = 0; ix < kw; ++ix) {
                        const int dx = kw == 3 ? (ix - 1) * dilation : 0;
                        const int x0 = std::max(0, -dx);
                        const int x1 = std::min(w, w - dx);
                        if (x1 <= x0 || y1 <= y0 || t1 <= t0) continue;
                        const double wv =
                            weights.data[wbase + (it * kh + iy) * kw + ix];
                        double wgrad = 0.0;
                        for (int t = t0; t < t1; ++t) {
                            for (int y = y0; y < y1; ++y) {
                                const double* g = &grad_out.data[offset4(
                                    grad_out.shape, co, t, y, x0)];
                                const double* src = &input.data[offset4(
                                    input.shape, ci, t + dt, y + dy, x0 + dx)];
                                double* gin = &grad_input.data[offset4(
                                    grad_input.shape, ci, t + dt, y + dy,
                                    x0 + dx)];
                                const int len = x1 - x0;
                                for (int x = 0; x < len; ++x) {
                                    wgrad += g[x] * src[x];
                                    gin[x] += wv * g[x];
                                }
                            }
                        }
                        grad_weights.data[wbase + (it * kh + iy) * kw + ix] +=
                            wgrad;
                    }
                }
            }
        }
    }
}

Tensor temporal_block(const Tensor& input, const ConvParams& conv1,
                      const ConvParams& conv2, int dilation,
                      double residual_scale) {
    Tensor a = conv_nd(input, conv1.weights, conv1.bias, dilation);
    for (double& v : a.data) v = std::max(v, 0.0);
    Tensor b = conv_nd(a, conv2.weights, conv2.bias, dilation);
    Tensor out = input;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] += residual_scale * b.data[i];
    }
    return out;
}

std::vector<std::vector<double>*> StcnParameters::buffers() {
    std::vector<std::vector<double>*> out;
    out.push_back(&entry.weights.data);
    out.push_back(&entry.bias);
    for (ConvParams& c : blocks) {
        out.push_back(&c.weights.data);
        out.push_back(&c.bias);
    }
    out.push_back(&final.weights.data);
    out.push_back(&final.bias);
    return out;
}

std::vector<const std::vector<double>*> StcnParameters::buffers() const {
    std::vector<const std::vector<double>*> out;
    out.push_back(&entry.weights.data);
    out.push_back(&entry.bias);
    for (const ConvParams& c : blocks) {
        out.push_back(&c.weights.data);
        out.push_back(&c.bias);
    }
    out.push_back(&final.weights.data);
    out.push_back(&final.bias);
    return out;
}

std::size_t StcnParameters::parameter_count() const {
    std::size_t n = 0;
    for (const auto* b : buffers()) n += b->size();
    return n;
}

namespace {

StcnParameters make_parameter_shapes(const StcnConfig& config) {
    if (config.layers < 1 || config.blocks_per_layer < 1 || config.filters < 1 ||
        config.seq_len < 1) {
        throw InvalidInput("StcnConfig: layers, blocks, filters, seq_len >= 1");
    }
    if (config.kernel != 3) {
        throw InvalidInput("StcnConfig: kernel must be 3");
    }
    const int kt = config.temporal_kernel() ? 3 : 1;
    StcnParameters p;
    p.entry.weights = Tensor({config.filters, config.input_channels(), kt, 3, 3});
    p.entry.bias.assign(config.filters, 0.0);
    const int nblocks = config.layers * config.blocks_per_layer;
    p.blocks.resize(2 * nblocks);
    for (int i = 0; i < 2 * nblocks; ++i) {
        p.blocks[i].weights = Tensor({config.filters, config.filters, kt, 3, 3});
        p.blocks[i].bias.assign(config.filters, 0.0);
    }
    p.final.weights = Tensor({config.channels, config.filters, 1, 1, 1});
    p.final.bias.assign(config.channels, 0.0);
    return p;
}

void he_init(ConvParams& conv, Rng& rng) {
    const auto& s = conv.weights.shape;
    const std::size_t fan_in =
        static_cast<std::size_t>(s[1]) * s[2] * s[3] * s[4];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& v : conv.weights.data) {
        v = rng.uniform(-limit, limit);
    }
    std::fill(conv.bias.begin(), conv.bias.end(), 0.0);
}

}  // namespace

StcnParameters init_parameters(const StcnConfig& config, std::uint64_t seed) {
    StcnParameters p = make_parameter_shapes(config);
    Rng rng(seed);
    he_init(p.entry, rng);
    for (ConvParams& c : p.blocks) he_init(c, rng);
    he_init(p.final, rng);
    return p;
}

StcnParameters zero_parameters(const StcnConfig& config) {
    return make_parameter_shapes(config);
}

Tensor assemble_input(const StcnConfig& config, const std::vector<Image>& seq) {
    if (static_cast<int>(seq.size()) != config.seq_len) {
        throw InvalidInput("stcn: sequence length does not match config");
    }
    const Image& first = seq[0];
    if (first.channels != config.channels) {
        throw InvalidInput("stcn: channel count does not match config");
    }
    for (const Image& f : seq) {
        if (!f.same_shape(first)) {
            throw ShapeError("stcn: frames have mixed dimensions");
        }
    }
    const int h = first.height;
    const int w = first.width;
    const int c = config.channels;
    const int t_len = config.seq_len;
    Tensor input;
    if (config.variant == StcnVariant::kStacked) {
        input = Tensor({c * t_len, 1, h, w});
        for (int t = 0; t < t_len; ++t) {
            for (int ch = 0; ch < c; ++ch) {
                const double mean = config.mean_rgb[ch % config.mean_rgb.size()];
                double* dst = &input.data[offset4(input.shape, t * c + ch, 0, 0, 0)];
                const Image& f = seq[t];
                for (int y = 0; y < h; ++y) {
                    for (int x = 0; x < w; ++x) {
                        dst[static_cast<std::size_t>(y) * w + x] =
                            f.at(y, x, ch) - mean;
                    }
                }
            }
        }
    } else {
        input = Tensor({c, t_len, h, w});
        for (int ch = 0; ch < c; ++ch) {
            const double mean = config.mean_rgb[ch % config.mean_rgb.size()];
            for (int t = 0; t < t_len; ++t) {
                double* dst = &input.data[offset4(input.shape, ch, t, 0, 0)];
                const Image& f = seq[t];
                for (int y = 0; y < h; ++y) {
                    for (int x = 0; x < w; ++x) {
                        dst[static_cast<std::size_t>(y) * w + x] =
                            f.at(y, x, ch) - mean;
                    }
                }
            }
        }
    }
    return input;
}

namespace {

struct ForwardCache {
    Tensor input;
    std::vector<Tensor> block_x;  // input to each block; [0] is the entry output
    std::vector<Tensor> block_a;  // first-conv pre-activation per block
    Tensor last;                  // output of the final block
    Tensor collapsed;             // after temporal mean (alias copy when T==1)
};

Tensor forward_impl(const StcnConfig& config, const StcnParameters& params,
                    const std::vector<Image>& seq, ForwardCache* cache) {
    Tensor input = assemble_input(config, seq);
    Tensor x = conv_nd(input, params.entry.weights, params.entry.bias, 1);
    const int nblocks = config.layers * config.blocks_per_layer;
    if (cache) {
        cache->input = input;
        cache->block_x.clear();
        cache->block_a.clear();
        cache->block_x.reserve(nblocks);
        cache->block_a.reserve(nblocks);
    }
    for (int i = 0; i < nblocks; ++i) {
        const int dilation = config.dilation_of_block(i % config.blocks_per_layer);
        const ConvParams& c1 = params.blocks[2 * i];
        const ConvParams& c2 = params.blocks[2 * i + 1];
        Tensor a = conv_nd(x, c1.weights, c1.bias, dilation);
        Tensor r = a;
        for (double& v : r.data) v = std::max(v, 0.0);
        Tensor b = conv_nd(r, c2.weights, c2.bias, dilation);
        if (cache) {
            cache->block_x.push_back(x);
            cache->block_a.push_back(std::move(a));
        }
        for (std::size_t k = 0; k < x.data.size(); ++k) {
            x.data[k] += config.residual_scale * b.data[k];
        }
    }
    if (cache) cache->last = x;

    // Collapse the temporal axis (mean) before the final projection.
    Tensor collapsed;
    const int t_len = x.shape[1];
    if (t_len > 1) {
        collapsed = Tensor({x.shape[0], 1, x.shape[2], x.shape[3]});
        const std::size_t plane =
            static_cast<std::size_t>(x.shape[2]) * x.shape[3];
        const double inv = 1.0 / t_len;
        for (int ch = 0; ch < x.shape[0]; ++ch) {
            double* dst = &collapsed.data[ch * plane];
            for (int t = 0; t < t_len; ++t) {
                const double* src =
                    &x.data[(static_cast<std::size_t>(ch) * t_len + t) * plane];
                for (std::size_t k = 0; k < plane; ++k) dst[k] += src[k];
            }
            for (std::size_t k = 0; k < plane; ++k) dst[k] *= inv;
        }
    } else {
        collapsed = std::move(x);
    }
    if (cache) cache->collapsed = collapsed;

    Tensor out = conv_nd(collapsed, params.final.weights, params.final.bias, 1);
    for (int ch = 0; ch < config.channels; ++ch) {
        const double mean = config.mean_rgb[ch % config.mean_rgb.size()];
        double* dst = &out.data[offset4(out.shape, ch, 0, 0, 0)];
        const std::size_t plane =
            static_cast<std::size_t>(out.shape[2]) * out.shape[3];
        for (std::size_t k = 0; k < plane; ++k) dst[k] += mean;
    }
    return out;
}

// Accumulates parameter gradients for one sample given d(loss)/d(output).
void backward_impl(const StcnConfig& config, const StcnParameters& params,
                   const ForwardCache& cache, const Tensor& grad_output,
                   StcnParameters& grads) {
    // Final projection (the +mean_rgb shift has unit derivative).
    Tensor grad_collapsed;
    conv_nd_backward(cache.collapsed, params.final.weights, grad_output, 1,
                     grad_collapsed, grads.final.weights, grads.final.bias);

    // Undo the temporal mean: broadcast grad / T.
    Tensor grad_x;
    const int t_len = cache.last.shape[1];
    if (t_len > 1) {
        grad_x = Tensor(cache.last.shape);
        const std::size_t plane =
            static_cast<std::size_t>(grad_x.shape[2]) * grad_x.shape[3];
        const double inv = 1.0 / t_len;
        for (int ch = 0; ch < grad_x.shape[0]; ++ch) {
            const double* src = &grad_collapsed.data[ch * plane];
            for (int t = 0; t < t_len; ++t) {
                double* dst = &grad_x.data[
                    (static_cast<std::size_t>(ch) * t_len + t) * plane];
                for (std::size_t k = 0; k < plane; ++k) dst[k] = src[k] * inv;
            }
        }
    } else {
        grad_x = std::move(grad_collapsed);
    }

    const int nblocks = config.layers * config.blocks_per_layer;
    for (int i = nblocks - 1; i >= 0; --i) {
        const int dilation = config.dilation_of_block(i % config.blocks_per_layer);
        const ConvParams& c1 = params.blocks[2 * i];
        const ConvParams& c2 = params.blocks[2 * i + 1];
        // Branch gradient: residual_scale * grad_x
        Tensor grad_b(grad_x.shape);
        for (std::size_t k = 0; k < grad_b.data.size(); ++k) {
            grad_b.data[k] = config.residual_scale * grad_x.data[k];
        }
        // conv2 consumed relu(a).
        Tensor r = cache.block_a[i];
        for (double& v : r.data) v = std::max(v, 0.0);
        Tensor grad_r;
        conv_nd_backward(r, c2.weights, grad_b, dilation, grad_r,
                         grads.blocks[2 * i + 1].weights,
                         grads.blocks[2 * i + 1].bias);
        // ReLU mask.
        for (std::size_t k = 0; k < grad_r.data.size(); ++k) {
            if (cache.block_a[i].data[k] <= 0.0) grad_r.data[k] = 0.0;
        }
        Tensor grad_in_branch;
        conv_nd_backward(cache.block_x[i], c1.weights, grad_r, dilation,
                         grad_in_branch, grads.blocks[2 * i].weights,
                         grads.blocks[2 * i].bias);
        // Residual skip.
        for (std::size_t k = 0; k < grad_x.data.size(); ++k) {
            grad_x.data[k] += grad_in_branch.data[k];
        }
    }
    Tensor grad_input;
    conv_nd_backward(cache.input, params.entry.weights, grad_x, 1, grad_input,
                     grads.entry.weights, grads.entry.bias);
}

Tensor image_to_tensor(const Image& img) {
    Tensor t({img.channels, 1, img.height, img.width});
    for (int c = 0; c < img.channels; ++c) {
        double* dst = &t.data[offset4(t.shape, c, 0, 0, 0)];
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                dst[static_cast<std::size_t>(y) * img.width + x] = img.at(y, x, c);
            }
        }
    }
    return t;
}

}  // namespace

Tensor stcn_forward_raw(const StcnConfig& config, const StcnParameters& params,
                        const std::vector<Image>& seq) {
    return forward_impl(config, params, seq, nullptr);
}

Image stcn_forward(const StcnConfig& config, const StcnParameters& params,
                   const std::vector<Image>& seq) {
    const Tensor out = forward_impl(config, params, seq, nullptr);
    Image img(out.shape[2], out.shape[3], config.channels);
    for (int c = 0; c < config.channels; ++c) {
        const double* src = &out.data[offset4(out.shape, c, 0, 0, 0)];
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                const double v = src[static_cast<std::size_t>(y) * img.width + x];
                img.at(y, x, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
        }
    }
    return img;
}

double loss_and_gradients(const StcnConfig& config, const StcnParameters& params,
                          const std::vector<Sample>& batch, Loss loss,
                          StcnParameters& grads) {
    if (batch.empty()) {
        throw InvalidInput("loss_and_gradients: empty batch");
    }
    grads = zero_parameters(config);

    std::vector<ForwardCache> caches(batch.size());
    std::vector<Tensor> diffs;  // (output - target) * 255
    diffs.reserve(batch.size());
    std::size_t total = 0;
    double sum_abs = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Tensor out = forward_impl(config, params, batch[i].seq, &caches[i]);
        const Tensor target = image_to_tensor(batch[i].target);
        if (target.shape != out.shape) {
            throw ShapeError("loss_and_gradients: target shape mismatch");
        }
        Tensor diff(out.shape);
        for (std::size_t k = 0; k < diff.data.size(); ++k) {
            const double d = (out.data[k] - target.data[k]) * 255.0;
            diff.data[k] = d;
            sum_abs += std::abs(d);
            sum_sq += d * d;
        }
        total += diff.data.size();
        diffs.push_back(std::move(diff));
    }
    const double n = static_cast<double>(total);
    double value = 0.0;
    switch (loss) {
        case Loss::kL1: value = sum_abs / n; break;
        case Loss::kMse: value = sum_sq / n; break;
        case Loss::kRmse: value = std::sqrt(sum_sq / n); break;
    }
    if (!std::isfinite(value)) {
        throw DivergenceError("loss_and_gradients: non-finite loss");
    }

    const double rmse = std::sqrt(sum_sq / n);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Tensor grad_out(diffs[i].shape);
        for (std::size_t k = 0; k < grad_out.data.size(); ++k) {
            const double d = diffs[i].data[k];
            double g = 0.0;
            switch (loss) {
                case Loss::kL1:
                    g = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
                    g /= n;
                    break;
                case Loss::kMse:
                    g = 2.0 * d / n;
                    break;
                case Loss::kRmse:
                    g = rmse > 0.0 ? d / (n * rmse) : 0.0;
                    break;
            }
            grad_out.data[k] = g * 255.0;
        }
        backward_impl(config, params, caches[i], grad_out, grads);
    }
    return value;
}

double global_grad_norm(const StcnParameters& grads) {
    double sum = 0.0;
    for (const auto* buf : grads.buffers()) {
        for (double v : *buf) sum += v * v;
    }
    return std::sqrt(sum);
}

void clip_gradients(StcnParameters& grads, double max_norm) {
    const double norm = global_grad_norm(grads);
    if (norm <= max_norm || norm == 0.0) return;
    const double scale = max_norm / norm;
    for (auto* buf : grads.buffers()) {
        for (double& v : *buf) v *= scale;
    }
}

OptimState make_optim_state(const StcnParameters& params, double learning_rate) {
    OptimState state;
    state.learning_rate = learning_rate;
    for (const auto* buf : params.buffers()) {
        state.m.emplace_back(buf->size(), 0.0);
        state.v.emplace_back(buf->size(), 0.0);
        state.v_max.emplace_back(buf->size(), 0.0);
    }
    return state;
}

void adam_amsgrad_step(OptimState& state, StcnParameters& params,
                       const StcnParameters& grads) {
    const auto pbufs = params.buffers();
    const auto gbufs = grads.buffers();
    if (pbufs.size() != state.m.size() || pbufs.size() != gbufs.size()) {
        throw ShapeError("adam_amsgrad_step: state/parameter shape mismatch");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t b = 0; b < pbufs.size(); ++b) {
        std::vector<double>& p = *pbufs[b];
        const std::vector<double>& g = *gbufs[b];
        std::vector<double>& m = state.m[b];
        std::vector<double>& v = state.v[b];
        std::vector<double>& vmax = state.v_max[b];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            vmax[i] = std::max(vmax[i], v[i]);
            const double m_hat = m[i] / bc1;
            const double v_hat = vmax[i] / bc2;
            p[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

ReceptiveField receptive_field(const StcnConfig& config) {
    int growth = 0;
    for (int l = 0; l < config.layers; ++l) {
        for (int b = 0; b < config.blocks_per_layer; ++b) {
            growth += 4 * config.dilation_of_block(b);
        }
    }
    ReceptiveField rf;
    rf.spatial = 3 + growth;  // entry conv contributes 2, final 1x1 nothing
    rf.temporal = config.temporal_kernel() ? 3 + growth : 1;
    return rf;
}

Image flip_horizontal(const Image& img) {
    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
            }
        }
    }
    return out;
}

Image flip_vertical(const Image& img) {
    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                out.at(y, x, c) = img.at(img.height - 1 - y, x, c);
            }
        }
    }
    return out;
}

Sample augment(const std::vector<Image>& video, const Image& target, int seq_len,
               Rng& rng) {
    if (static_cast<int>(video.size()) < seq_len) {
        throw InvalidInput("augment: video shorter than the sequence length");
    }
    const std::int64_t max_start = static_cast<std::int64_t>(video.size()) - seq_len;
    const std::int64_t start = rng.uniform_int(0, max_start);
    const bool reverse = rng.coin();
    const bool hflip = rng.coin();
    const bool vflip = rng.coin();

    Sample sample;
    sample.seq.reserve(seq_len);
    for (int i = 0; i < seq_len; ++i) {
        const std::int64_t idx = reverse ? start + seq_len - 1 - i : start + i;
        Image frame = video[idx];
        if (hflip) frame = flip_horizontal(frame);
        if (vflip) frame = flip_vertical(frame);
        sample.seq.push_back(std::move(frame));
    }
    sample.target = target;
    if (hflip) sample.target = flip_horizontal(sample.target);
    if (vflip) sample.target = flip_vertical(sample.target);
    return sample;
}

namespace {

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

}  // namespace

void save_parameters(const StcnConfig& config, const StcnParameters& params,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("save_parameters: cannot open " + path);
    }
    out.write("STCN", 4);
    write_raw<std::uint32_t>(out, 1);  // version
    write_raw<std::uint32_t>(
        out, config.variant == StcnVariant::kStacked ? 0u : 1u);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(config.layers));
    write_raw<std::uint32_t>(out,
                             static_cast<std::uint32_t>(config.blocks_per_layer));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(config.filters));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(config.kernel));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(config.seq_len));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(config.channels));
    write_raw<double>(out, config.residual_scale);
    write_raw<std::uint32_t>(out,
                             static_cast<std::uint32_t>(config.mean_rgb.size()));
    for (double v : config.mean_rgb) write_raw<double>(out, v);
    for (const auto* buf : params.buffers()) {
        out.write(reinterpret_cast<const char*>(buf->data()),
                  static_cast<std::streamsize>(buf->size() * sizeof(double)));
    }
    if (!out) {
        throw IoError("save_parameters: write failed for " + path);
    }
}

std::pair<StcnConfig, StcnParameters> load_parameters(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("load_parameters: cannot open " + path);
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "STCN", 4) != 0) {
        throw IoError("load_parameters: bad magic in " + path);
    }
    const std::uint32_t version = read_raw<std::uint32_t>(in);
    if (version != 1) {
        throw IoError("load_parameters: unsupported version in " + path);
    }
    StcnConfig config;
    config.variant = read_raw<std::uint32_t>(in) == 0 ? StcnVariant::kStacked
                                                      : StcnVariant::kNonStacked;
    config.layers = static_cast<int>(read_raw<std::uint32_t>(in));
    config.blocks_per_layer = static_cast<int>(read_raw<std::uint32_t>(in));
    config.filters = static_cast<int>(read_raw<std::uint32_t>(in));
    config.kernel = static_cast<int>(read_raw<std::uint32_t>(in));
    config.seq_len = static_cast<int>(read_raw<std::uint32_t>(in));
    config.channels = static_cast<int>(read_raw<std::uint32_t>(in));
    config.residual_scale = read_raw<double>(in);
    const std::uint32_t mean_count = read_raw<std::uint32_t>(in);
    config.mean_rgb.resize(mean_count);
    for (std::uint32_t i = 0; i < mean_count; ++i) {
        config.mean_rgb[i] = read_raw<double>(in);
    }
    StcnParameters params = zero_parameters(config);
    for (auto* buf : params.buffers()) {
        in.read(reinterpret_cast<char*>(buf->data()),
                static_cast<std::streamsize>(buf->size() * sizeof(double)));
    }
    if (!in) {
        throw IoError("load_parameters: truncated file " + path);
    }
    return {config, params};
}

}  // namespace fluidlens
