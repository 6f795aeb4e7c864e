#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "fluidlens/common.hpp"

namespace fluidlens {

// Row-major dense tensor of doubles.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(element_count(shape), 0.0);
    }

    static std::size_t element_count(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int e : s) n *= static_cast<std::size_t>(e);
        return n;
    }

    std::size_t size() const { return data.size(); }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

}  // namespace fluidlens
