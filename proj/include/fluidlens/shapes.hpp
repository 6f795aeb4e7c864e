#pragma once

#include <cstdint>
#include <set>
#include <string>

#include "fluidlens/image.hpp"
#include "fluidlens/rng.hpp"

namespace fluidlens {

enum class ShapeKind { kSquare, kRectangle, kTriangle, kCircle, kEllipse };

std::string shape_kind_name(ShapeKind kind);

struct ShapesConfig {
    int min_shapes = 3;
    int max_shapes = 10;
    std::set<ShapeKind> allowed_shapes = {ShapeKind::kSquare, ShapeKind::kRectangle,
                                          ShapeKind::kTriangle, ShapeKind::kCircle,
                                          ShapeKind::kEllipse};
    int image_height = 128;
    int image_width = 128;
    std::uint64_t seed = 0;
};

// Random overlapping opaque shapes over a light-grey background. Sizes are
// drawn uniformly in [min_dim/10, min_dim/3]; later shapes paint over earlier
// ones. Fully deterministic in config.seed.
Image generate_shapes(const ShapesConfig& config);

}  // namespace fluidlens
