#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fluidlens/image.hpp"
#include "fluidlens/rng.hpp"

namespace fluidlens {

enum class BlurMethod { kBox, kGaussian, kBilateral };

std::string blur_method_name(BlurMethod method);

struct BlurSpec {
    BlurMethod method = BlurMethod::kBox;
    int kernel = 3;               // odd, {3,5,7,9}
    double gaussian_std = 0.0;    // {0,2,4,6}; 0 means size-derived
    double bilateral_sigma = 0.0; // {0,50,100,200}, color sigma on 0-255 scale

    std::string to_json() const;
};

Image box_blur(const Image& img, int kernel);

// std = 0 derives the std from the kernel size:
// 0.3 * ((kernel - 1) / 2 - 1) + 0.8
Image gaussian_blur(const Image& img, int kernel, double std_dev);

// Normalized 1D Gaussian kernel used by gaussian_blur; exposed for testing.
std::vector<double> make_gaussian_kernel(int kernel, double std_dev);

// sigma_color on the 0-255 scale; 0 disables the range term (pure spatial
// Gaussian). sigma_space <= 0 defaults to kernel / 2.
Image bilateral_blur(const Image& img, int kernel, double sigma_color,
                     double sigma_space = 0.0);

// Applies a spec; zero_is_noop switches the std/sigma = 0 interpretation from
// "size-derived default" to "identity".
Image apply_blur(const Image& img, const BlurSpec& spec, bool zero_is_noop = false);

// Random method/parameter draw over the supported grids.
std::pair<Image, BlurSpec> random_blur(const Image& img, Rng& rng,
                                       bool zero_is_noop = false);

}  // namespace fluidlens
