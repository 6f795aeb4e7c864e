#pragma once

#include <stdexcept>
#include <string>

namespace fluidlens {

struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Total internal reflection during refraction.
struct TirError : std::runtime_error {
    explicit TirError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite loss during training; carries the step context in the message.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fluidlens
