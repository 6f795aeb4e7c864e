#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fluidlens/image.hpp"

namespace fluidlens {

using Vec3 = std::array<double, 3>;

// One traveling sinusoid of the water surface height field.
struct WaveComponent {
    double amplitude = 0.0;   // meters
    double wavelength = 1.0;  // meters, > 0
    double dir_x = 1.0;       // unit propagation direction
    double dir_y = 0.0;
    double phase = 0.0;  // radians
    double speed = 0.0;  // meters/second
};

// Superposition of traveling sinusoids:
//   eta(x,y,t) = sum_i A_i * sin(k_i * (d_i . (x,y)) - k_i * s_i * t + phi_i)
// with k_i = 2*pi / lambda_i.
struct WaterSurface {
    std::vector<WaveComponent> components;

    // Upper bound on |grad eta|: sum_i A_i * k_i.
    double max_slope() const;
};

enum class BorderPolicy { kClamp, kMarkInvalid };

struct SimParams {
    double depth = 0.20;        // meters, bottom plane below mean surface
    double pixel_pitch = 1e-3;  // meters per pixel
    double n_air = 1.0;
    double n_water = 1.33;
    BorderPolicy border_policy = BorderPolicy::kClamp;
};

// Per-pixel 2D displacement map in pixel units.
struct FlowField {
    int height = 0;
    int width = 0;
    std::vector<float> u;  // horizontal (columns)
    std::vector<float> v;  // vertical (rows)
    std::vector<std::uint8_t> valid;

    FlowField() = default;
    FlowField(int h, int w)
        : height(h), width(w),
          u(static_cast<std::size_t>(h) * w, 0.0f),
          v(static_cast<std::size_t>(h) * w, 0.0f),
          valid(static_cast<std::size_t>(h) * w, 1) {}

    std::size_t idx(int y, int x) const {
        return static_cast<std::size_t>(y) * width + x;
    }
};

double surface_height(const WaterSurface& surface, double x, double y, double t);

// Analytic gradient (d eta/dx, d eta/dy).
std::array<double, 2> surface_gradient(const WaterSurface& surface, double x,
                                       double y, double t);

// normalize(-d eta/dx, -d eta/dy, 1)
Vec3 surface_normal(const WaterSurface& surface, double x, double y, double t);

// Snell refraction in vector form. incident and normal are unit vectors with
// incident . normal < 0. Throws TirError on total internal reflection.
Vec3 refract(const Vec3& incident, const Vec3& normal, double n1, double n2);

FlowField displacement_map(const WaterSurface& surface, double t,
                           const SimParams& params, int height, int width);

// Backward-warp of an image through a displacement field, bilinear sampling,
// clamped borders. Shared by the simulator and the reconstruction pipeline.
Image warp(const Image& frame, const FlowField& flow);

Image render_frame(const Image& target, const WaterSurface& surface, double t,
                   const SimParams& params);

std::vector<Image> simulate_video(const Image& target,
                                  const WaterSurface& surface, double fps,
                                  double duration, const SimParams& params);

}  // namespace fluidlens
