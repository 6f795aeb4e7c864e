#pragma once

#include <cstdint>
#include <random>

namespace fluidlens {

// Deterministic RNG. Distribution draws are implemented by hand so that
// generated streams depend only on the mt19937_64 engine, not on
// implementation-defined std:: distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(engine_() % span);
    }

    bool coin() { return (engine_() & 1u) != 0; }

    // Fresh seed for a child stream.
    std::uint64_t fork_seed() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace fluidlens
