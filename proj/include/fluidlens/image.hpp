#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fluidlens/common.hpp"

namespace fluidlens {

// Dense H x W x C intensity buffer, row-major, values in [0,1].
// channels is 1 (greyscale) or 3 (RGB).
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    Image() = default;
    Image(int h, int w, int c, float fill = 0.0f)
        : height(h), width(w), channels(c),
          data(static_cast<std::size_t>(h) * w * c, fill) {}

    float& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(height) * width;
    }
    bool same_shape(const Image& other) const {
        return height == other.height && width == other.width &&
               channels == other.channels;
    }
};

// MSE / RMSE / L1 on the 0-255 scale; PSNR in dB, +inf for identical images.
struct MetricsReport {
    double mse = 0.0;
    double rmse = 0.0;
    double l1 = 0.0;
    double psnr = 0.0;

    std::string to_json() const;
};

MetricsReport metrics(const Image& a, const Image& b);

Image to_grayscale(const Image& img);

Image resize_bilinear(const Image& img, int new_h, int new_w);

// Per-channel mean over all pixels of all images (weighted by pixel count).
std::vector<double> mean_rgb(const std::vector<Image>& images);

// Bilinear sample at real-valued (x, y) with clamp-to-edge borders.
float sample_bilinear(const Image& img, float x, float y, int c);

}  // namespace fluidlens
