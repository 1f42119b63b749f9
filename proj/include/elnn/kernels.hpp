#pragma once

#include <cstddef>
#include <span>

#include "elnn/lstm.hpp"
#include "elnn/tensor.hpp"

namespace elnn {

/// The parallel kernel runs all samples in lockstep, one time step at a time, so
/// every weight product is a matrix product over the batch. Each product is cut
/// into this many column blocks whatever the thread count, and every output
/// element is summed by one block in a fixed order: results do not depend on
/// how many threads run it.
inline constexpr std::size_t kProductBlocks = 8;

/// MSE of stages [first, last) mapping `input` to `target` over the listed samples,
/// and its gradient with respect to those stages' parameters (written to `grad`,
/// which must hold Model::paramCount(first, last) values).
double lossAndGradient(const Model& m, std::size_t first, std::size_t last, const Tensor3& input,
                       const Tensor3& target, std::span<const std::size_t> samples, std::span<double> grad);

/// Same quantity from the per-sample LSTM code, one sample after another into a
/// single accumulator. Agrees with lossAndGradient up to rounding.
double lossAndGradientSerial(const Model& m, std::size_t first, std::size_t last, const Tensor3& input,
                             const Tensor3& target, std::span<const std::size_t> samples, std::span<double> grad);

/// Loss only, through the batched forward pass.
double batchLoss(const Model& m, std::size_t first, std::size_t last, const Tensor3& input, const Tensor3& target,
                 std::span<const std::size_t> samples);

}  // namespace elnn
