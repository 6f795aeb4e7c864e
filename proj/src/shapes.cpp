#include "fluidlens/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fluidlens {

std::string shape_kind_name(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::kSquare: return "square";
        case ShapeKind::kRectangle: return "rectangle";
        case ShapeKind::kTriangle: return "triangle";
        case ShapeKind::kCircle: return "circle";
        case ShapeKind::kEllipse: return "ellipse";
    }
    return "unknown";
}

namespace {

struct Color {
    float r, g, b;
};

void paint(Image& img, int y, int x, const Color& c) {
    img.at(y, x, 0) = c.r;
    img.at(y, x, 1) = c.g;
    img.at(y, x, 2) = c.b;
}

void fill_rect(Image& img, double cy, double cx, double h, double w,
               const Color& color) {
    const int y0 = std::max(0, static_cast<int>(std::ceil(cy - h / 2)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::floor(cy + h / 2)));
    const int x0 = std::max(0, static_cast<int>(std::ceil(cx - w / 2)));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::floor(cx + w / 2)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            paint(img, y, x, color);
        }
    }
}

// Pixel-center predicate fill so area oracles are exact.
void fill_ellipse(Image& img, double cy, double cx, double ry, double rx,
                  const Color& color) {
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - ry)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + ry)));
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - rx)));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + rx)));
    for (int y = y0; y <= y1; ++y) {
        const double dy = (y - cy) / ry;
        for (int x = x0; x <= x1; ++x) {
            const double dx = (x - cx) / rx;
            if (dx * dx + dy * dy <= 1.0) {
                paint(img, y, x, color);
            }
        }
    }
}

double edge(double ax, double ay, double bx, double by, double px, double py) {
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

void fill_triangle(Image& img, const double* xs, const double* ys,
                   const Color& color) {
    const int y0 = std::max(0.0, std::floor(std::min({ys[0], ys[1], ys[2]})));
    const int y1 = std::min<double>(img.height - 1,
                                    std::ceil(std::max({ys[0], ys[1], ys[2]})));
    const int x0 = std::max(0.0, std::floor(std::min({xs[0], xs[1], xs[2]})));
    const int x1 = std::min<double>(img.width - 1,
                                    std::ceil(std::max({xs[0], xs[1], xs[2]})));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double e0 = edge(xs[0], ys[0], xs[1], ys[1], x, y);
            const double e1 = edge(xs[1], ys[1], xs[2], ys[2], x, y);
            const double e2 = edge(xs[2], ys[2], xs[0], ys[0], x, y);
            if ((e0 >= 0 && e1 >= 0 && e2 >= 0) ||
                (e0 <= 0 && e1 <= 0 && e2 <= 0)) {
                paint(img, y, x, color);
            }
        }
    }
}

}  // namespace

Image generate_shapes(const ShapesConfig& config) {
    if (config.min_shapes < 1 || config.min_shapes > config.max_shapes) {
        throw InvalidInput("generate_shapes: bad shape count range");
    }
    if (config.allowed_shapes.empty()) {
        throw InvalidInput("generate_shapes: allowed_shapes is empty");
    }
    const int min_dim = std::min(config.image_height, config.image_width);
    const double size_lo = min_dim / 10.0;
    const double size_hi = min_dim / 3.0;
    if (size_lo < 2.0) {
        throw InvalidInput("generate_shapes: image too small to place any shape");
    }
    Rng rng(config.seed);
    Image img(config.image_height, config.image_width, 3);
    // Light-grey background so shapes stay distinguishable.
    const Color bg{static_cast<float>(rng.uniform(0.8, 1.0)),
                   static_cast<float>(rng.uniform(0.8, 1.0)),
                   static_cast<float>(rng.uniform(0.8, 1.0))};
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.data[i * 3] = bg.r;
        img.data[i * 3 + 1] = bg.g;
        img.data[i * 3 + 2] = bg.b;
    }

    const std::vector<ShapeKind> kinds(config.allowed_shapes.begin(),
                                       config.allowed_shapes.end());
    const int n = static_cast<int>(
        rng.uniform_int(config.min_shapes, config.max_shapes));
    for (int s = 0; s < n; ++s) {
        const ShapeKind kind =
            kinds[rng.uniform_int(0, static_cast<std::int64_t>(kinds.size()) - 1)];
        const Color color{static_cast<float>(rng.uniform01()),
                          static_cast<float>(rng.uniform01()),
                          static_cast<float>(rng.uniform01())};
        const double size = rng.uniform(size_lo, size_hi);
        // Center chosen so the shape's bounding box stays inside the image.
        const double half = size / 2.0;
        const double cy = rng.uniform(half, config.image_height - 1 - half);
        const double cx = rng.uniform(half, config.image_width - 1 - half);
        switch (kind) {
            case ShapeKind::kSquare:
                fill_rect(img, cy, cx, size, size, color);
                break;
            case ShapeKind::kRectangle: {
                const double w = rng.uniform(size_lo, size_hi);
                const double half_w = std::min(w / 2.0, std::min(cx, config.image_width - 1 - cx));
                fill_rect(img, cy, cx, size, 2 * half_w, color);
                break;
            }
            case ShapeKind::kTriangle: {
                double xs[3], ys[3];
                for (int v = 0; v < 3; ++v) {
                    xs[v] = cx + rng.uniform(-half, half);
                    ys[v] = cy + rng.uniform(-half, half);
                }
                fill_triangle(img, xs, ys, color);
                break;
            }
            case ShapeKind::kCircle:
                fill_ellipse(img, cy, cx, half, half, color);
                break;
            case ShapeKind::kEllipse: {
                const double other = rng.uniform(size_lo, size_hi) / 2.0;
                const double ry = std::min(half, other);
                fill_ellipse(img, cy, cx, ry, half, color);
                break;
            }
        }
    }
    return img;
}

}  // namespace fluidlens
