#include "fluidlens/reconstruct.hpp"

#include "fluidlens/blur.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

namespace fluidlens {

namespace {

int resolve_n(const std::vector<Image>& frames, std::optional<int> n,
              const char* op) {
    if (frames.empty()) {
        throw InvalidInput(std::string(op) + ": empty frame list");
    }
    const int count = static_cast<int>(frames.size());
    if (!n.has_value()) return count;
    if (*n < 1 || *n > count) {
        throw InvalidInput(std::string(op) + ": n out of range");
    }
    return *n;
}

void check_uniform(const std::vector<Image>& frames, int n, const char* op) {
    for (int i = 1; i < n; ++i) {
        if (!frames[i].same_shape(frames[0])) {
            throw ShapeError(std::string(op) + ": frame dimensions differ");
        }
    }
}

}  // namespace

Image temporal_mean(const std::vector<Image>& frames, std::optional<int> n) {
    const int count = resolve_n(frames, n, "temporal_mean");
    check_uniform(frames, count, "temporal_mean");
    const Image& first = frames[0];
    std::vector<double> acc(first.data.size(), 0.0);
    for (int i = 0; i < count; ++i) {
        const std::vector<float>& d = frames[i].data;
        for (std::size_t k = 0; k < acc.size(); ++k) {
            acc[k] += d[k];
        }
    }
    Image out(first.height, first.width, first.channels);
    const double inv = 1.0 / count;
    for (std::size_t k = 0; k < acc.size(); ++k) {
        out.data[k] = static_cast<float>(acc[k] * inv);
    }
    return out;
}

Image temporal_median(const std::vector<Image>& frames, std::optional<int> n) {
    const int count = resolve_n(frames, n, "temporal_median");
    check_uniform(frames, count, "temporal_median");
    const Image& first = frames[0];
    Image out(first.height, first.width, first.channels);
    std::vector<float> vals(count);
    for (std::size_t k = 0; k < first.data.size(); ++k) {
        for (int i = 0; i < count; ++i) {
            vals[i] = frames[i].data[k];
        }
        const int mid = count / 2;
        std::nth_element(vals.begin(), vals.begin() + mid, vals.begin() + count);
        if (count % 2 == 1) {
            out.data[k] = vals[mid];
        } else {
            const float hi = vals[mid];
            const float lo = *std::max_element(vals.begin(), vals.begin() + mid);
            out.data[k] = 0.5f * (lo + hi);
        }
    }
    return out;
}

DescriptorField dense_sift(const Image& img, int cell_size) {
    if (cell_size < 1) {
        throw InvalidInput("dense_sift: cell_size must be >= 1");
    }
    const Image grey = img.channels == 3 ? to_grayscale(img) : img;
    const int h = grey.height;
    const int w = grey.width;
    constexpr int kBins = 8;
    constexpr double kBinWidth = 6.283185307179586 / kBins;

    // Orientation-binned gradient magnitude planes, replicate-padded so the
    // cell sums below see clamped samples at the borders.
    const int pad = 2 * cell_size;
    const int ph = h + 2 * pad;
    const int pw = w + 2 * pad;
    std::vector<std::vector<double>> planes(
        kBins, std::vector<double>(static_cast<std::size_t>(h) * w, 0.0));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float gx = 0.5f * (grey.at(y, std::min(x + 1, w - 1), 0) -
                                     grey.at(y, std::max(x - 1, 0), 0));
            const float gy = 0.5f * (grey.at(std::min(y + 1, h - 1), x, 0) -
                                     grey.at(std::max(y - 1, 0), x, 0));
            const double mag = std::sqrt(static_cast<double>(gx) * gx +
                                         static_cast<double>(gy) * gy);
            if (mag == 0.0) continue;
            double angle = std::atan2(gy, gx);
            if (angle < 0.0) angle += 6.283185307179586;
            int bin = static_cast<int>(angle / kBinWidth);
            if (bin >= kBins) bin = kBins - 1;
            planes[bin][(static_cast<std::size_t>(y)) * w + x] = mag;
        }
    }
    // Move into padded layout with edge replication.
    std::vector<std::vector<double>> padded(
        kBins, std::vector<double>(static_cast<std::size_t>(ph) * pw));
    for (int b = 0; b < kBins; ++b) {
        for (int y = 0; y < ph; ++y) {
            const int sy = std::clamp(y - pad, 0, h - 1);
            for (int x = 0; x < pw; ++x) {
                const int sx = std::clamp(x - pad, 0, w - 1);
                padded[b][static_cast<std::size_t>(y) * pw + x] =
                    planes[b][static_cast<std::size_t>(sy) * w + sx];
            }
        }
    }
    // Integral images, (ph+1) x (pw+1).
    const int iw = pw + 1;
    std::vector<std::vector<double>> integral(
        kBins, std::vector<double>(static_cast<std::size_t>(ph + 1) * iw, 0.0));
    for (int b = 0; b < kBins; ++b) {
        const std::vector<double>& src = padded[b];
        std::vector<double>& itg = integral[b];
        for (int y = 0; y < ph; ++y) {
            double row_sum = 0.0;
            for (int x = 0; x < pw; ++x) {
                row_sum += src[static_cast<std::size_t>(y) * pw + x];
                itg[static_cast<std::size_t>(y + 1) * iw + x + 1] =
                    itg[static_cast<std::size_t>(y) * iw + x + 1] + row_sum;
            }
        }
    }

    DescriptorField field;
    field.height = h;
    field.width = w;
    field.dim = 128;
    field.data.assign(static_cast<std::size_t>(h) * w * 128, 0.0f);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float* desc = &field.data[(static_cast<std::size_t>(y) * w + x) * 128];
            double energy = 0.0;
            for (int ci = 0; ci < 4; ++ci) {
                // cell rows in padded coords
                const int y0 = y + pad + (ci - 2) * cell_size;
                const int y1 = y0 + cell_size;
                for (int cj = 0; cj < 4; ++cj) {
                    const int x0 = x + pad + (cj - 2) * cell_size;
                    const int x1 = x0 + cell_size;
                    for (int b = 0; b < kBins; ++b) {
                        const std::vector<double>& itg = integral[b];
                        const double sum =
                            itg[static_cast<std::size_t>(y1) * iw + x1] -
                            itg[static_cast<std::size_t>(y0) * iw + x1] -
                            itg[static_cast<std::size_t>(y1) * iw + x0] +
                            itg[static_cast<std::size_t>(y0) * iw + x0];
                        const float v = static_cast<float>(sum);
                        desc[(ci * 4 + cj) * 8 + b] = v;
                        energy += sum * sum;
                    }
                }
            }
            if (energy > 0.0) {
                const float inv = static_cast<float>(1.0 / std::sqrt(energy));
                for (int k = 0; k < 128; ++k) desc[k] *= inv;
            }
        }
    }
    return field;
}

namespace {

// Truncated L1 distance between two 128-d descriptors; exits early once the
// partial sum reaches the cap.
inline float trunc_l1(const float* a, const float* b, float cap) {
    float sum = 0.0f;
    for (int chunk = 0; chunk < 128; chunk += 32) {
        for (int k = chunk; k < chunk + 32; ++k) {
            sum += std::abs(a[k] - b[k]);
        }
        if (sum >= cap) return cap;
    }
    return sum;
}

// Plain L1 distance, kept separate so cached costs stay informative above the
// truncation cap (the cap is applied where the energy is evaluated).
inline float raw_l1(const float* a, const float* b) {
    float sum = 0.0f;
    for (int k = 0; k < 128; ++k) {
        sum += std::abs(a[k] - b[k]);
    }
    return sum;
}

DescriptorField pool_half(const DescriptorField& f) {
    DescriptorField out;
    out.height = std::max(1, f.height / 2);
    out.width = std::max(1, f.width / 2);
    out.dim = f.dim;
    out.data.assign(
        static_cast<std::size_t>(out.height) * out.width * out.dim, 0.0f);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            float* dst =
                &out.data[(static_cast<std::size_t>(y) * out.width + x) * out.dim];
            int count = 0;
            for (int dy = 0; dy < 2; ++dy) {
                for (int dx = 0; dx < 2; ++dx) {
                    const int sy = 2 * y + dy;
                    const int sx = 2 * x + dx;
                    if (sy >= f.height || sx >= f.width) continue;
                    const float* src = f.at(sy, sx);
                    for (int k = 0; k < out.dim; ++k) dst[k] += src[k];
                    ++count;
                }
            }
            const float inv = 1.0f / static_cast<float>(count);
            for (int k = 0; k < out.dim; ++k) dst[k] *= inv;
        }
    }
    return out;
}

struct IntFlow {
    int height = 0;
    int width = 0;
    std::vector<int> u, v;

    IntFlow(int h, int w)
        : height(h), width(w),
          u(static_cast<std::size_t>(h) * w, 0),
          v(static_cast<std::size_t>(h) * w, 0) {}
    std::size_t idx(int y, int x) const {
        return static_cast<std::size_t>(y) * width + x;
    }
};

}  // namespace

FlowField estimate_flow(const DescriptorField& src, const DescriptorField& dst,
                        const FlowParams& params) {
    if (src.height != dst.height || src.width != dst.width) {
        throw ShapeError("estimate_flow: descriptor field dimensions differ");
    }
    if (params.search_radius < 1 || params.levels < 1) {
        throw InvalidInput("estimate_flow: bad FlowParams");
    }
    const float cap = static_cast<float>(params.truncation);
    const float lambda = static_cast<float>(params.smoothness_weight);

    // Descriptor pyramids, level 0 finest.
    std::vector<DescriptorField> src_pyr{src}, dst_pyr{dst};
    for (int l = 1; l < params.levels; ++l) {
        if (src_pyr.back().height <= 2 || src_pyr.back().width <= 2) break;
        src_pyr.push_back(pool_half(src_pyr.back()));
        dst_pyr.push_back(pool_half(dst_pyr.back()));
    }
    const int levels = static_cast<int>(src_pyr.size());

    const int r = params.search_radius;
    const int win = 2 * r + 1;
    const int ncand = win * win;

    IntFlow flow(src_pyr[levels - 1].height, src_pyr[levels - 1].width);
    for (int level = levels - 1; level >= 0; --level) {
        const DescriptorField& s = src_pyr[level];
        const DescriptorField& d = dst_pyr[level];
        const int h = s.height;
        const int w = s.width;
        if (level != levels - 1) {
            // Upsample the coarser solution (nearest, doubled magnitude).
            IntFlow up(h, w);
            for (int y = 0; y < h; ++y) {
                const int cy = std::min(y / 2, flow.height - 1);
                for (int x = 0; x < w; ++x) {
                    const int cx = std::min(x / 2, flow.width - 1);
                    up.u[up.idx(y, x)] = 2 * flow.u[flow.idx(cy, cx)];
                    up.v[up.idx(y, x)] = 2 * flow.v[flow.idx(cy, cx)];
                }
            }
            flow = std::move(up);
        }

        // Cached data costs (untruncated) for the candidate window around each
        // pixel's initial displacement. Out-of-bounds candidates get +inf.
        std::vector<float> cost(static_cast<std::size_t>(h) * w * ncand,
                                std::numeric_limits<float>::infinity());
        std::vector<int> base_u(static_cast<std::size_t>(h) * w);
        std::vector<int> base_v(static_cast<std::size_t>(h) * w);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t p = flow.idx(y, x);
                const int cu = flow.u[p];
                const int cv = flow.v[p];
                base_u[p] = cu;
                base_v[p] = cv;
                const float* sd = s.at(y, x);
                float* cp = &cost[p * ncand];
                for (int dv = -r; dv <= r; ++dv) {
                    const int ty = y + cv + dv;
                    if (ty < 0 || ty >= h) continue;
                    for (int du = -r; du <= r; ++du) {
                        const int tx = x + cu + du;
                        if (tx < 0 || tx >= w) continue;
                        cp[(dv + r) * win + (du + r)] = raw_l1(sd, d.at(ty, tx));
                    }
                }
            }
        }

        // Global-translation initialization: the per-pixel data term is noisy
        // when the reference is a blurry mean, but averaged over the whole
        // field (untruncated, in-bounds pixels only) it still identifies a
        // dominant shift. Candidates that push most of the field out of
        // bounds are skipped.
        {
            const std::size_t npix = static_cast<std::size_t>(h) * w;
            double best_mean = std::numeric_limits<double>::infinity();
            int best_du = 0, best_dv = 0;
            for (int dv = -r; dv <= r; ++dv) {
                for (int du = -r; du <= r; ++du) {
                    double total = 0.0;
                    std::size_t inside = 0;
                    const int ci = (dv + r) * win + (du + r);
                    for (std::size_t p = 0; p < npix; ++p) {
                        const float c = cost[p * ncand + ci];
                        if (std::isinf(c)) continue;
                        total += c;
                        ++inside;
                    }
                    if (inside * 2 < npix) continue;
                    const double mean_cost = total / static_cast<double>(inside);
                    const int mag = std::abs(du) + std::abs(dv);
                    const int best_mag = std::abs(best_du) + std::abs(best_dv);
                    if (mean_cost < best_mean ||
                        (mean_cost == best_mean && mag < best_mag)) {
                        best_mean = mean_cost;
                        best_du = du;
                        best_dv = dv;
                    }
                }
            }
            for (std::size_t p = 0; p < npix; ++p) {
                flow.u[p] = base_u[p] + best_du;
                flow.v[p] = base_v[p] + best_dv;
            }
        }

        // Per-pixel refinement under the full energy, ties broken toward the
        // smallest absolute displacement so identical inputs settle at zero.
        auto pick_best = [&](int y, int x, bool use_smooth) {
            const std::size_t p = flow.idx(y, x);
            const float* cp = &cost[p * ncand];
            float best = std::numeric_limits<float>::infinity();
            int best_u = flow.u[p];
            int best_v = flow.v[p];
            int best_mag = std::abs(best_u) + std::abs(best_v);
            bool found = false;
            for (int dv = -r; dv <= r; ++dv) {
                for (int du = -r; du <= r; ++du) {
                    float c = cp[(dv + r) * win + (du + r)];
                    if (std::isinf(c)) continue;
                    c = std::min(c, cap);
                    const int wu = base_u[p] + du;
                    const int wv = base_v[p] + dv;
                    if (use_smooth) {
                        if (x > 0) {
                            const std::size_t q = flow.idx(y, x - 1);
                            c += lambda * (std::abs(wu - flow.u[q]) +
                                           std::abs(wv - flow.v[q]));
                        }
                        if (x + 1 < w) {
                            const std::size_t q = flow.idx(y, x + 1);
                            c += lambda * (std::abs(wu - flow.u[q]) +
                                           std::abs(wv - flow.v[q]));
                        }
                        if (y > 0) {
                            const std::size_t q = flow.idx(y - 1, x);
                            c += lambda * (std::abs(wu - flow.u[q]) +
                                           std::abs(wv - flow.v[q]));
                        }
                        if (y + 1 < h) {
                            const std::size_t q = flow.idx(y + 1, x);
                            c += lambda * (std::abs(wu - flow.u[q]) +
                                           std::abs(wv - flow.v[q]));
                        }
                    }
                    const int mag = std::abs(wu) + std::abs(wv);
                    if (!found || c < best || (c == best && mag < best_mag)) {
                        found = true;
                        best = c;
                        best_u = wu;
                        best_v = wv;
                        best_mag = mag;
                    }
                }
            }
            if (found) {
                flow.u[p] = best_u;
                flow.v[p] = best_v;
            }
        };

        // ICM sweeps, alternating scan order.
        for (int sweep = 0; sweep < 3; ++sweep) {
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) pick_best(y, x, true);
            }
            for (int y = h - 1; y >= 0; --y) {
                for (int x = w - 1; x >= 0; --x) pick_best(y, x, true);
            }
        }
    }

    // Energy guard: fall back to the zero field if it scores better.
    const int h = src.height;
    const int w = src.width;
    auto energy = [&](const IntFlow& f) {
        double e = 0.0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t p = f.idx(y, x);
                const int ty = y + f.v[p];
                const int tx = x + f.u[p];
                if (ty < 0 || ty >= h || tx < 0 || tx >= w) {
                    e += cap;
                } else {
                    e += trunc_l1(src.at(y, x), dst.at(ty, tx), cap);
                }
                if (x + 1 < w) {
                    const std::size_t q = f.idx(y, x + 1);
                    e += lambda * (std::abs(f.u[p] - f.u[q]) +
                                   std::abs(f.v[p] - f.v[q]));
                }
                if (y + 1 < h) {
                    const std::size_t q = f.idx(y + 1, x);
                    e += lambda * (std::abs(f.u[p] - f.u[q]) +
                                   std::abs(f.v[p] - f.v[q]));
                }
            }
        }
        return e;
    };
    IntFlow zero(h, w);
    const IntFlow& chosen = energy(flow) <= energy(zero) ? flow : zero;

    FlowField out(h, w);
    for (std::size_t i = 0; i < out.u.size(); ++i) {
        out.u[i] = static_cast<float>(chosen.u[i]);
        out.v[i] = static_cast<float>(chosen.v[i]);
    }
    return out;
}

Image siftflow_mean(const std::vector<Image>& frames, std::optional<int> n,
                    const FlowParams& params) {
    const int count = resolve_n(frames, n, "siftflow_mean");
    check_uniform(frames, count, "siftflow_mean");
    const Image mean = temporal_mean(frames, count);
    // Descriptors are extracted from smoothed copies: the mean image is an
    // average of displaced frames, so broadening both sides makes the match
    // track the displacement centroid instead of locking onto one ghost.
    const DescriptorField mean_desc = dense_sift(gaussian_blur(mean, 9, 2.0));

    const Image& first = frames[0];
    std::vector<double> acc(first.data.size(), 0.0);
    for (int i = 0; i < count; ++i) {
        const DescriptorField frame_desc =
            dense_sift(gaussian_blur(frames[i], 9, 2.0));
        // Correspondence from the mean image into the frame: the warp pulls
        // frame content back onto the mean's pixel grid.
        const FlowField flow = estimate_flow(mean_desc, frame_desc, params);
        const Image warped = warp(frames[i], flow);
        for (std::size_t k = 0; k < acc.size(); ++k) {
            acc[k] += warped.data[k];
        }
    }
    Image out(first.height, first.width, first.channels);
    const double inv = 1.0 / count;
    for (std::size_t k = 0; k < acc.size(); ++k) {
        out.data[k] = static_cast<float>(acc[k] * inv);
    }
    return out;
}

}  // namespace fluidlens
