#pragma once

#include <json.hpp>

#include "fluidlens/lensing.hpp"

namespace fluidlens {

inline void to_json(nlohmann::json& j, const WaveComponent& c) {
    j = {{"amplitude", c.amplitude}, {"wavelength", c.wavelength},
         {"dir_x", c.dir_x},         {"dir_y", c.dir_y},
         {"phase", c.phase},         {"speed", c.speed}};
}

inline void from_json(const nlohmann::json& j, WaveComponent& c) {
    j.at("amplitude").get_to(c.amplitude);
    j.at("wavelength").get_to(c.wavelength);
    j.at("dir_x").get_to(c.dir_x);
    j.at("dir_y").get_to(c.dir_y);
    j.at("phase").get_to(c.phase);
    j.at("speed").get_to(c.speed);
}

inline void to_json(nlohmann::json& j, const WaterSurface& s) {
    j = {{"components", s.components}};
}

inline void from_json(const nlohmann::json& j, WaterSurface& s) {
    j.at("components").get_to(s.components);
}

inline void to_json(nlohmann::json& j, const SimParams& p) {
    j = {{"depth", p.depth},
         {"pixel_pitch", p.pixel_pitch},
         {"n_air", p.n_air},
         {"n_water", p.n_water},
         {"border_policy",
          p.border_policy == BorderPolicy::kClamp ? "clamp" : "mark-invalid"}};
}

inline void from_json(const nlohmann::json& j, SimParams& p) {
    j.at("depth").get_to(p.depth);
    j.at("pixel_pitch").get_to(p.pixel_pitch);
    j.at("n_air").get_to(p.n_air);
    j.at("n_water").get_to(p.n_water);
    const std::string policy = j.at("border_policy").get<std::string>();
    p.border_policy =
        policy == "clamp" ? BorderPolicy::kClamp : BorderPolicy::kMarkInvalid;
}

}  // namespace fluidlens
