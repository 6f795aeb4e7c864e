#include "fluidlens/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fluidlens {

std::string MetricsReport::to_json() const {
    std::ostringstream out;
    out.precision(12);
    out << "{\"mse\":" << mse << ",\"rmse\":" << rmse << ",\"l1\":" << l1
        << ",\"psnr\":";
    if (std::isinf(psnr)) {
        out << "\"inf\"";
    } else {
        out << psnr;
    }
    out << "}";
    return out.str();
}

MetricsReport metrics(const Image& a, const Image& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("metrics: image shapes differ");
    }
    double sum_sq = 0.0;
    double sum_abs = 0.0;
    const std::size_t n = a.data.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = (static_cast<double>(a.data[i]) - b.data[i]) * 255.0;
        sum_sq += d * d;
        sum_abs += std::abs(d);
    }
    MetricsReport r;
    r.mse = sum_sq / static_cast<double>(n);
    r.rmse = std::sqrt(r.mse);
    r.l1 = sum_abs / static_cast<double>(n);
    r.psnr = r.rmse > 0.0 ? 20.0 * std::log10(255.0 / r.rmse)
                          : std::numeric_limits<double>::infinity();
    return r;
}

Image to_grayscale(const Image& img) {
    if (img.channels == 1) {
        return img;
    }
    if (img.channels != 3) {
        throw InvalidInput("to_grayscale: expected a 1- or 3-channel image");
    }
    Image out(img.height, img.width, 1);
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const float* p = &img.data[i * 3];
        out.data[i] = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
    }
    return out;
}

float sample_bilinear(const Image& img, float x, float y, int c) {
    const float fx = std::clamp(x, 0.0f, static_cast<float>(img.width - 1));
    const float fy = std::clamp(y, 0.0f, static_cast<float>(img.height - 1));
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const float ax = fx - static_cast<float>(x0);
    const float ay = fy - static_cast<float>(y0);
    const float top = img.at(y0, x0, c) * (1.0f - ax) + img.at(y0, x1, c) * ax;
    const float bot = img.at(y1, x0, c) * (1.0f - ax) + img.at(y1, x1, c) * ax;
    return top * (1.0f - ay) + bot * ay;
}

Image resize_bilinear(const Image& img, int new_h, int new_w) {
    if (new_h < 1 || new_w < 1) {
        throw InvalidInput("resize_bilinear: target dimensions must be >= 1");
    }
    if (new_h == img.height && new_w == img.width) {
        return img;
    }
    Image out(new_h, new_w, img.channels);
    const float sx = static_cast<float>(img.width) / static_cast<float>(new_w);
    const float sy = static_cast<float>(img.height) / static_cast<float>(new_h);
    for (int y = 0; y < new_h; ++y) {
        const float src_y = (static_cast<float>(y) + 0.5f) * sy - 0.5f;
        for (int x = 0; x < new_w; ++x) {
            const float src_x = (static_cast<float>(x) + 0.5f) * sx - 0.5f;
            for (int c = 0; c < img.channels; ++c) {
                out.at(y, x, c) = sample_bilinear(img, src_x, src_y, c);
            }
        }
    }
    return out;
}

std::vector<double> mean_rgb(const std::vector<Image>& images) {
    if (images.empty()) {
        throw InvalidInput("mean_rgb: empty image list");
    }
    const int channels = images.front().channels;
    std::vector<double> sums(channels, 0.0);
    std::size_t pixels = 0;
    for (const Image& img : images) {
        if (img.channels != channels) {
            throw InvalidInput("mean_rgb: mixed channel counts");
        }
        const std::size_t n = img.pixel_count();
        for (std::size_t i = 0; i < n; ++i) {
            for (int c = 0; c < channels; ++c) {
                sums[c] += img.data[i * channels + c];
            }
        }
        pixels += n;
    }
    for (double& s : sums) {
        s /= static_cast<double>(pixels);
    }
    return sums;
}

}  // namespace fluidlens
