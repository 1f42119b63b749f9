#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "elnn/encode.hpp"
#include "elnn/lstm.hpp"

namespace elnn {

enum class Optimizer { GradientDescent, Adam };

std::string toString(Optimizer o);
Optimizer parseOptimizer(const std::string& s);

struct TrainConfig {
  std::size_t epochs = 20000;           // Flat and Deep
  std::size_t piecewiseEpochs = 10000;  // each Piecewise half
  double learningRate = 1e-4;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::Adam;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
};

class TrainingDiverged : public Error {
public:
  using Error::Error;
};

struct TrainResult {
  Model model;
  /// Objective before each update. Piecewise lists part A's epochs, then part B's.
  std::vector<double> curve;
  std::size_t phaseBoundary = 0;  // first part-B entry of `curve`; equals curve.size() otherwise
  double initialLoss = 0.0;       // output MSE on the training set before training
  double finalLoss = 0.0;         // and after
};

/// Full-batch training on the listed samples. Throws TrainingDiverged on a non-finite loss.
TrainResult train(Architecture arch, const DatasetTensors& data, std::span<const std::size_t> samples,
                  const TrainConfig& cfg);
TrainResult train(Architecture arch, const DatasetTensors& data, const TrainConfig& cfg);

/// Updates stages [first, last) of `m` to fit `input` -> `target`; appends to `curve`.
void fitStages(Model& m, std::size_t first, std::size_t last, const Tensor3& input, const Tensor3& target,
               std::span<const std::size_t> samples, std::size_t epochs, const TrainConfig& cfg,
               std::vector<double>& curve);

ModelDims dimsOf(const DatasetTensors& data);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle, then sample at shuffled position p joins fold p mod k. Requires 2 <= k <= n.
std::vector<Fold> makeFolds(std::size_t n, std::size_t k, std::uint64_t seed);

struct FoldResult {
  Fold split;
  TrainResult result;
};

/// Folds train one after another; `onFold` sees each result as soon as it is ready.
std::vector<FoldResult> crossValidate(Architecture arch, const DatasetTensors& data, const TrainConfig& cfg,
                                      const std::function<void(std::size_t, const FoldResult&)>& onFold = {});

/// Decoded statements per step; padding and undecodable tuples are dropped.
std::vector<std::vector<Axiom>> decodeSteps(std::span<const double> output, std::size_t steps, std::size_t width,
                                            const Signature& sig);
std::vector<std::vector<Axiom>> predict(const Model& m, std::span<const double> input);
/// Decoded support-layer view; throws for Flat models.
std::vector<std::vector<Axiom>> predictIntermediate(const Model& m, std::span<const double> input);

/// Text checkpoint: header lines, then every parameter as a hex float.
void writeCheckpoint(const std::string& path, const Model& m);
Model readCheckpoint(const std::string& path);

/// `epoch,loss` rows, epochs counted from 1.
void writeLossCurve(const std::string& path, std::span<const double> curve);

}  // namespace elnn
