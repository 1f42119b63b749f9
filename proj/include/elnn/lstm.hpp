#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "elnn/kb.hpp"
#include "elnn/tensor.hpp"

namespace elnn {

enum class Architecture { Flat, Deep, Piecewise };

std::string toString(Architecture a);
Architecture parseArchitecture(const std::string& s);

/// One LSTM layer followed by a per-step affine readout.
///
/// Parameters are stored contiguously in this order:
///   wx  [in x 4H]   input weights, input-major; gate blocks i, f, o, g
///   wh  [H x 4H]    recurrent weights, hidden-major
///   b   [4H]
///   wy  [out x H]   readout
///   by  [out]
struct StageShape {
  std::size_t in = 0;
  std::size_t hidden = 0;
  std::size_t out = 0;
  std::size_t offset = 0;  // into Model::params

  std::size_t wxSize() const { return in * 4 * hidden; }
  std::size_t whSize() const { return hidden * 4 * hidden; }
  std::size_t bSize() const { return 4 * hidden; }
  std::size_t wySize() const { return out * hidden; }
  std::size_t bySize() const { return out; }
  std::size_t count() const { return wxSize() + whSize() + bSize() + wySize() + bySize(); }
  bool operator==(const StageShape&) const = default;
};

struct ModelDims {
  std::size_t kbWidth = 0;
  std::size_t supportWidth = 0;
  std::size_t outWidth = 0;
  std::size_t steps = 0;
  bool operator==(const ModelDims&) const = default;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

/// Flat: one stage kb -> out (hidden = out).
/// Deep and Piecewise: kb -> support (hidden = support), then support -> out (hidden = out).
/// The two share a shape and differ only in how they are trained.
struct Model {
  Architecture arch = Architecture::Flat;
  ModelDims dims;
  Signature signature;  // scale the outputs decode under
  std::uint64_t seed = 0;
  std::vector<StageShape> stages;
  std::vector<double> params;

  /// Uniform in +-1/sqrt(fan-in), one seeded stream per stage.
  static Model create(Architecture arch, const ModelDims& dims, const Signature& sig, std::uint64_t seed);
  /// A single-stage model over an arbitrary in/out width (used for Piecewise halves and tests).
  static Model single(std::size_t in, std::size_t out, std::size_t steps, std::uint64_t seed,
                      std::size_t stageSalt = 0);

  std::size_t inputWidth() const { return stages.front().in; }
  std::size_t outputWidth() const { return stages.back().out; }
  std::size_t paramCount(std::size_t first, std::size_t last) const;
  std::span<double> stageParams(std::size_t s) { return {params.data() + stages[s].offset, stages[s].count()}; }
  std::span<const double> stageParams(std::size_t s) const {
    return {params.data() + stages[s].offset, stages[s].count()};
  }
  bool operator==(const Model&) const = default;
};

/// Per-step record of one stage, kept for backpropagation.
struct StageCache {
  std::size_t steps = 0;
  std::vector<double> gates;  // [T x 4H] activated i, f, o, g
  std::vector<double> cell;   // [T x H]
  std::vector<double> tanhCell;
  std::vector<double> hidden;  // [T x H]
  std::vector<double> output;  // [T x out]
};

/// Runs one stage over a [T x in] sequence, zero initial state.
void stageForward(const StageShape& shape, std::span<const double> params, std::span<const double> input,
                  std::size_t steps, StageCache& cache);

/// Accumulates parameter gradients for `dOutput` ([T x out]) into `grad` (the stage's slice).
/// When `dInput` is non-empty it receives d loss / d input, [T x in].
void stageBackward(const StageShape& shape, std::span<const double> params, std::span<const double> input,
                   const StageCache& cache, std::span<const double> dOutput, std::span<double> grad,
                   std::span<double> dInput);

/// Forward through stages [first, last) for one sample; returns every stage's output.
std::vector<std::vector<double>> forwardStages(const Model& m, std::span<const double> input, std::size_t first,
                                               std::size_t last);

struct ForwardResult {
  std::vector<double> output;            // [T x outWidth]
  std::vector<double> intermediate;      // [T x supportWidth], empty for Flat
};

/// Inference on one sample ([steps x kbWidth]).
ForwardResult forward(const Model& m, std::span<const double> input);

/// Mean of squared differences over every element.
double mseLoss(std::span<const double> pred, std::span<const double> target);

}  // namespace elnn
