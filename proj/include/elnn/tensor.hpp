#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace elnn {

/// Dense row-major [samples x steps x width] array of doubles.
struct Tensor3 {
  std::size_t samples = 0;
  std::size_t steps = 0;
  std::size_t width = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(std::size_t n, std::size_t t, std::size_t w) : samples(n), steps(t), width(w), data(n * t * w, 0.0) {}

  double& at(std::size_t i, std::size_t t, std::size_t k) { return data[(i * steps + t) * width + k]; }
  double at(std::size_t i, std::size_t t, std::size_t k) const { return data[(i * steps + t) * width + k]; }

  std::span<double> row(std::size_t i, std::size_t t) { return {data.data() + (i * steps + t) * width, width}; }
  std::span<const double> row(std::size_t i, std::size_t t) const {
    return {data.data() + (i * steps + t) * width, width};
  }
  /// All steps of one sample, [steps x width].
  std::span<double> sample(std::size_t i) { return {data.data() + i * steps * width, steps * width}; }
  std::span<const double> sample(std::size_t i) const { return {data.data() + i * steps * width, steps * width}; }

  bool sameShape(const Tensor3& o) const { return samples == o.samples && steps == o.steps && width == o.width; }
  bool operator==(const Tensor3&) const = default;
};

}  // namespace elnn
