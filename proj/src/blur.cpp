#include "fluidlens/blur.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fluidlens {

std::string blur_method_name(BlurMethod method) {
    switch (method) {
        case BlurMethod::kBox: return "box";
        case BlurMethod::kGaussian: return "gaussian";
        case BlurMethod::kBilateral: return "bilateral";
    }
    return "unknown";
}

std::string BlurSpec::to_json() const {
    std::ostringstream out;
    out << "{\"method\":\"" << blur_method_name(method)
        << "\",\"kernel\":" << kernel;
    if (method == BlurMethod::kGaussian) {
        out << ",\"gaussian_std\":" << gaussian_std;
    } else if (method == BlurMethod::kBilateral) {
        out << ",\"bilateral_sigma\":" << bilateral_sigma;
    }
    out << "}";
    return out.str();
}

namespace {

void check_kernel(int kernel, const char* op) {
    if (kernel < 1 || kernel % 2 == 0) {
        throw InvalidInput(std::string(op) + ": kernel must be odd and >= 1");
    }
}

double derived_std(int kernel) {
    return 0.3 * ((kernel - 1) / 2.0 - 1.0) + 0.8;
}

// Separable convolution with a normalized 1D kernel, clamp-to-edge borders.
Image separable(const Image& img, const std::vector<double>& k1d) {
    const int r = static_cast<int>(k1d.size()) / 2;
    Image tmp(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int i = -r; i <= r; ++i) {
                    const int sx = std::clamp(x + i, 0, img.width - 1);
                    acc += k1d[i + r] * img.at(y, sx, c);
                }
                tmp.at(y, x, c) = static_cast<float>(acc);
            }
        }
    }
    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                double acc = 0.0;
                for (int i = -r; i <= r; ++i) {
                    const int sy = std::clamp(y + i, 0, img.height - 1);
                    acc += k1d[i + r] * tmp.at(sy, x, c);
                }
                out.at(y, x, c) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

}  // namespace

Image box_blur(const Image& img, int kernel) {
    check_kernel(kernel, "box_blur");
    const std::vector<double> flat(kernel, 1.0 / kernel);
    return separable(img, flat);
}

std::vector<double> make_gaussian_kernel(int kernel, double std_dev) {
    check_kernel(kernel, "make_gaussian_kernel");
    if (std_dev < 0.0) {
        throw InvalidInput("make_gaussian_kernel: std must be >= 0");
    }
    const double sigma = std_dev == 0.0 ? derived_std(kernel) : std_dev;
    const int r = kernel / 2;
    std::vector<double> k(kernel);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        k[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + r];
    }
    for (double& v : k) v /= sum;
    return k;
}

Image gaussian_blur(const Image& img, int kernel, double std_dev) {
    return separable(img, make_gaussian_kernel(kernel, std_dev));
}

Image bilateral_blur(const Image& img, int kernel, double sigma_color,
                     double sigma_space) {
    check_kernel(kernel, "bilateral_blur");
    if (sigma_color < 0.0) {
        throw InvalidInput("bilateral_blur: sigma_color must be >= 0");
    }
    if (sigma_space <= 0.0) sigma_space = kernel / 2.0;
    const int r = kernel / 2;
    std::vector<double> spatial(static_cast<std::size_t>(kernel) * kernel);
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            spatial[(dy + r) * kernel + (dx + r)] = std::exp(
                -(dy * dy + dx * dx) / (2.0 * sigma_space * sigma_space));
        }
    }
    const bool use_range = sigma_color > 0.0;
    const double inv_2sc2 =
        use_range ? 1.0 / (2.0 * sigma_color * sigma_color) : 0.0;

    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                const double center = img.at(y, x, c);
                double wsum = 0.0;
                double acc = 0.0;
                for (int dy = -r; dy <= r; ++dy) {
                    const int sy = std::clamp(y + dy, 0, img.height - 1);
                    for (int dx = -r; dx <= r; ++dx) {
                        const int sx = std::clamp(x + dx, 0, img.width - 1);
                        const double v = img.at(sy, sx, c);
                        double wgt = spatial[(dy + r) * kernel + (dx + r)];
                        if (use_range) {
                            const double diff = (v - center) * 255.0;
                            wgt *= std::exp(-diff * diff * inv_2sc2);
                        }
                        wsum += wgt;
                        acc += wgt * v;
                    }
                }
                out.at(y, x, c) = static_cast<float>(acc / wsum);
            }
        }
    }
    return out;
}

Image apply_blur(const Image& img, const BlurSpec& spec, bool zero_is_noop) {
    switch (spec.method) {
        case BlurMethod::kBox:
            return box_blur(img, spec.kernel);
        case BlurMethod::kGaussian:
            if (zero_is_noop && spec.gaussian_std == 0.0) return img;
            return gaussian_blur(img, spec.kernel, spec.gaussian_std);
        case BlurMethod::kBilateral:
            if (zero_is_noop && spec.bilateral_sigma == 0.0) return img;
            return bilateral_blur(img, spec.kernel, spec.bilateral_sigma);
    }
    throw InvalidInput("apply_blur: unknown method");
}

std::pair<Image, BlurSpec> random_blur(const Image& img, Rng& rng,
                                       bool zero_is_noop) {
    static constexpr int kKernels[] = {3, 5, 7, 9};
    static constexpr double kStds[] = {0.0, 2.0, 4.0, 6.0};
    static constexpr double kSigmas[] = {0.0, 50.0, 100.0, 200.0};
    BlurSpec spec;
    switch (rng.uniform_int(0, 2)) {
        case 0: spec.method = BlurMethod::kBox; break;
        case 1: spec.method = BlurMethod::kGaussian; break;
        default: spec.method = BlurMethod::kBilateral; break;
    }
    spec.kernel = kKernels[rng.uniform_int(0, 3)];
    if (spec.method == BlurMethod::kGaussian) {
        spec.gaussian_std = kStds[rng.uniform_int(0, 3)];
    } else if (spec.method == BlurMethod::kBilateral) {
        spec.bilateral_sigma = kSigmas[rng.uniform_int(0, 3)];
    }
    return {apply_blur(img, spec, zero_is_noop), spec};
}

}  // namespace fluidlens
