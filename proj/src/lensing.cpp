#include "fluidlens/lensing.hpp"

#include <cmath>

namespace fluidlens {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double WaterSurface::max_slope() const {
    double s = 0.0;
    for (const WaveComponent& c : components) {
        s += c.amplitude * kTwoPi / c.wavelength;
    }
    return s;
}

double surface_height(const WaterSurface& surface, double x, double y,
                      double t) {
    double eta = 0.0;
    for (const WaveComponent& c : surface.components) {
        const double k = kTwoPi / c.wavelength;
        const double arg =
            k * (c.dir_x * x + c.dir_y * y) - k * c.speed * t + c.phase;
        eta += c.amplitude * std::sin(arg);
    }
    return eta;
}

std::array<double, 2> surface_gradient(const WaterSurface& surface, double x,
                                       double y, double t) {
    double gx = 0.0, gy = 0.0;
    for (const WaveComponent& c : surface.components) {
        const double k = kTwoPi / c.wavelength;
        const double arg =
            k * (c.dir_x * x + c.dir_y * y) - k * c.speed * t + c.phase;
        const double common = c.amplitude * k * std::cos(arg);
        gx += common * c.dir_x;
        gy += common * c.dir_y;
    }
    return {gx, gy};
}

Vec3 surface_normal(const WaterSurface& surface, double x, double y, double t) {
    const auto [gx, gy] = surface_gradient(surface, x, y, t);
    const double inv_len = 1.0 / std::sqrt(gx * gx + gy * gy + 1.0);
    return {-gx * inv_len, -gy * inv_len, inv_len};
}

Vec3 refract(const Vec3& incident, const Vec3& normal, double n1, double n2) {
    const double eta = n1 / n2;
    const double cos_i = -(incident[0] * normal[0] + incident[1] * normal[1] +
                           incident[2] * normal[2]);
    const double sin2_t = eta * eta * (1.0 - cos_i * cos_i);
    if (sin2_t > 1.0) {
        throw TirError("refract: total internal reflection");
    }
    const double cos_t = std::sqrt(1.0 - sin2_t);
    const double scale = eta * cos_i - cos_t;
    Vec3 t{eta * incident[0] + scale * normal[0],
           eta * incident[1] + scale * normal[1],
           eta * incident[2] + scale * normal[2]};
    const double inv_len =
        1.0 / std::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2]);
    return {t[0] * inv_len, t[1] * inv_len, t[2] * inv_len};
}

FlowField displacement_map(const WaterSurface& surface, double t,
                           const SimParams& params, int height, int width) {
    FlowField flow(height, width);
    const Vec3 down{0.0, 0.0, -1.0};
    for (int row = 0; row < height; ++row) {
        const double wy = row * params.pixel_pitch;
        for (int col = 0; col < width; ++col) {
            const double wx = col * params.pixel_pitch;
            const double eta = surface_height(surface, wx, wy, t);
            const Vec3 n = surface_normal(surface, wx, wy, t);
            const Vec3 dir = refract(down, n, params.n_air, params.n_water);
            // Ray enters at z = eta, bottom plane at z = -depth.
            const double drop = eta + params.depth;
            const double lambda = drop / -dir[2];
            const double du = lambda * dir[0] / params.pixel_pitch;
            const double dv = lambda * dir[1] / params.pixel_pitch;
            const std::size_t i = flow.idx(row, col);
            flow.u[i] = static_cast<float>(du);
            flow.v[i] = static_cast<float>(dv);
            if (params.border_policy == BorderPolicy::kMarkInvalid) {
                const double hx = col + du;
                const double hy = row + dv;
                if (hx < 0.0 || hx > width - 1 || hy < 0.0 || hy > height - 1) {
                    flow.valid[i] = 0;
                }
            }
        }
    }
    return flow;
}

Image warp(const Image& frame, const FlowField& flow) {
    if (flow.height != frame.height || flow.width != frame.width) {
        throw ShapeError("warp: flow dimensions do not match frame");
    }
    Image out(frame.height, frame.width, frame.channels);
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            const std::size_t i = flow.idx(y, x);
            const float sx = static_cast<float>(x) + flow.u[i];
            const float sy = static_cast<float>(y) + flow.v[i];
            for (int c = 0; c < frame.channels; ++c) {
                out.at(y, x, c) = sample_bilinear(frame, sx, sy, c);
            }
        }
    }
    return out;
}

Image render_frame(const Image& target, const WaterSurface& surface, double t,
                   const SimParams& params) {
    const FlowField flow =
        displacement_map(surface, t, params, target.height, target.width);
    return warp(target, flow);
}

std::vector<Image> simulate_video(const Image& target,
                                  const WaterSurface& surface, double fps,
                                  double duration, const SimParams& params) {
    if (fps <= 0.0 || duration <= 0.0) {
        throw InvalidInput("simulate_video: fps and duration must be > 0");
    }
    const int count = static_cast<int>(std::floor(duration * fps));
    std::vector<Image> frames;
    frames.reserve(count);
    for (int k = 0; k < count; ++k) {
        frames.push_back(render_frame(target, surface, k / fps, params));
    }
    return frames;
}

}  // namespace fluidlens
