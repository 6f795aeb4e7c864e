#pragma once

#include <optional>
#include <vector>

#include "fluidlens/image.hpp"
#include "fluidlens/lensing.hpp"

namespace fluidlens {

// "use all frames" selector for the stacking operations
inline constexpr std::optional<int> kAllFrames = std::nullopt;

Image temporal_mean(const std::vector<Image>& frames,
                    std::optional<int> n = kAllFrames);

// Per-pixel, per-channel median; even counts take the midpoint of the two
// central order statistics.
Image temporal_median(const std::vector<Image>& frames,
                      std::optional<int> n = kAllFrames);

// Per-pixel 128-d descriptors: 4x4 cells of cell_size^2 pixels, 8 orientation
// bins, L2-normalized (zero vector where gradient energy is zero).
struct DescriptorField {
    int height = 0;
    int width = 0;
    int dim = 128;
    std::vector<float> data;

    const float* at(int y, int x) const {
        return &data[(static_cast<std::size_t>(y) * width + x) * dim];
    }
};

DescriptorField dense_sift(const Image& img, int cell_size = 2);

struct FlowParams {
    int search_radius = 4;  // per pyramid level
    int levels = 3;
    double smoothness_weight = 0.005 * 128;
    double truncation = 2.0;  // data-cost cap
};

// Discrete coarse-to-fine window search minimizing the truncated-L1 data term
// plus first-order smoothness. Never returns a field with higher energy than
// the zero field.
FlowField estimate_flow(const DescriptorField& src, const DescriptorField& dst,
                        const FlowParams& params = {});

// Mean image -> per-frame SIFT flow to the mean -> warp -> mean of warps.
Image siftflow_mean(const std::vector<Image>& frames,
                    std::optional<int> n = kAllFrames,
                    const FlowParams& params = {});

}  // namespace fluidlens
