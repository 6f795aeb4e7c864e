#pragma once

#include <string>

#include "fluidlens/image.hpp"

namespace fluidlens {

// 8-bit PNG, RGB or greyscale. Values are quantized with round-half-away-
// from-zero on write and mapped back to [0,1] on read.
Image load_png(const std::string& path);
void save_png(const Image& img, const std::string& path);

}  // namespace fluidlens
