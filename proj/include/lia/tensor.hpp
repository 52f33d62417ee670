#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "lia/errors.hpp"

namespace lia {

/// Dense row-major tensor of 64-bit floats. Rank is dynamic; the confusion
/// machinery only ever builds rank-2 (C x C) and rank-3 (C x C x L) tensors.
struct DenseTensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    DenseTensor() = default;
    DenseTensor(std::vector<std::size_t> dims, double fill = 0.0)
        : shape(std::move(dims)), values(element_count(shape), fill) {}

    static std::size_t element_count(const std::vector<std::size_t>& dims) {
        return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                               std::multiplies<>());
    }

    std::size_t size() const { return values.size(); }

    double& at(std::size_t i, std::size_t j) { return values[i * shape[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * shape[1] + j]; }

    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return values[(i * shape[1] + j) * shape[2] + k];
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return values[(i * shape[1] + j) * shape[2] + k];
    }

    void check_invariants() const {
        if (element_count(shape) != values.size())
            throw ShapeError("tensor shape does not match value count");
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!std::isfinite(values[i]))
                throw NumericError("non-finite tensor entry",
                                   static_cast<std::ptrdiff_t>(i));
    }
};

inline void require_same_shape(const DenseTensor& a, const DenseTensor& b,
                               const char* what) {
    if (a.shape != b.shape) throw ShapeError(std::string(what) + ": shape mismatch");
}

}  // namespace lia
