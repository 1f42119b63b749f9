#include "elnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "elnn/kernels.hpp"

namespace elnn {

std::string toString(Optimizer o) { return o == Optimizer::Adam ? "adam" : "gd"; }

Optimizer parseOptimizer(const std::string& s) {
  if (s == "adam") return Optimizer::Adam;
  if (s == "gd" || s == "sgd") return Optimizer::GradientDescent;
  throw ConfigError("unknown optimizer '" + s + "' (gd, adam)");
}

ModelDims dimsOf(const DatasetTensors& d) { return {d.kbWidth(), d.supportWidth(), d.outWidth(), d.steps()}; }

void fitStages(Model& m, std::size_t first, std::size_t last, const Tensor3& input, const Tensor3& target,
               std::span<const std::size_t> samples, std::size_t epochs, const TrainConfig& cfg,
               std::vector<double>& curve) {
  const std::size_t P = m.paramCount(first, last);
  auto params = std::span<double>(m.params).subspan(m.stages[first].offset, P);
  std::vector<double> grad(P), mom, vel;
  if (cfg.optimizer == Optimizer::Adam) {
    mom.assign(P, 0.0);
    vel.assign(P, 0.0);
  }
  double b1t = 1.0, b2t = 1.0;
  for (std::size_t e = 0; e < epochs; ++e) {
    const double loss = lossAndGradient(m, first, last, input, target, samples, grad);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "loss became " << loss << " at epoch " << e + 1 << " (learning rate " << cfg.learningRate
          << "); try a smaller learning rate";
      throw TrainingDiverged(msg.str());
    }
    curve.push_back(loss);
    if (cfg.optimizer == Optimizer::GradientDescent) {
      for (std::size_t k = 0; k < P; ++k) params[k] -= cfg.learningRate * grad[k];
      continue;
    }
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    const double c1 = 1.0 / (1.0 - b1t), c2 = 1.0 / (1.0 - b2t);
    for (std::size_t k = 0; k < P; ++k) {
      mom[k] = cfg.beta1 * mom[k] + (1.0 - cfg.beta1) * grad[k];
      vel[k] = cfg.beta2 * vel[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
      params[k] -= cfg.learningRate * (mom[k] * c1) / (std::sqrt(vel[k] * c2) + cfg.epsilon);
    }
  }
}

TrainResult train(Architecture arch, const DatasetTensors& data, std::span<const std::size_t> samples,
                  const TrainConfig& cfg) {
  if (samples.empty()) throw DatasetError("train: no samples");
  TrainResult r;
  r.model = Model::create(arch, dimsOf(data), data.signature, cfg.seed);
  auto& m = r.model;
  const std::size_t S = m.stages.size();
  r.initialLoss = batchLoss(m, 0, S, data.X, data.Y, samples);

  if (arch == Architecture::Piecewise) {
    fitStages(m, 0, 1, data.X, data.S, samples, cfg.piecewiseEpochs, cfg, r.curve);
    r.phaseBoundary = r.curve.size();
    // Part B learns from true supports; at inference it reads part A's output instead.
    fitStages(m, 1, 2, data.S, data.Y, samples, cfg.piecewiseEpochs, cfg, r.curve);
  } else {
    fitStages(m, 0, S, data.X, data.Y, samples, cfg.epochs, cfg, r.curve);
    r.phaseBoundary = r.curve.size();
  }
  r.finalLoss = batchLoss(m, 0, S, data.X, data.Y, samples);
  if (!std::isfinite(r.finalLoss)) throw TrainingDiverged("final loss is not finite");
  return r;
}

TrainResult train(Architecture arch, const DatasetTensors& data, const TrainConfig& cfg) {
  std::vector<std::size_t> all(data.X.samples);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return train(arch, data, all, cfg);
}

std::vector<Fold> makeFolds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("need at least 2 folds, got " + std::to_string(k));
  if (k > n) throw ConfigError(std::to_string(k) + " folds requested for " + std::to_string(n) + " samples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> foldOf(n);
  for (std::size_t p = 0; p < n; ++p) foldOf[order[p]] = p % k;
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < k; ++f) (foldOf[i] == f ? folds[f].test : folds[f].train).push_back(i);
  return folds;
}

std::vector<FoldResult> crossValidate(Architecture arch, const DatasetTensors& data, const TrainConfig& cfg,
                                      const std::function<void(std::size_t, const FoldResult&)>& onFold) {
  auto folds = makeFolds(data.X.samples, cfg.folds, cfg.seed);
  std::vector<FoldResult> out;
  out.reserve(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    TrainConfig fc = cfg;
    fc.seed = cfg.seed + 0x100000001b3ULL * (f + 1);
    auto r = train(arch, data, folds[f].train, fc);
    out.push_back({std::move(folds[f]), std::move(r)});
    if (onFold) onFold(f, out.back());
  }
  return out;
}

std::vector<std::vector<Axiom>> decodeSteps(std::span<const double> output, std::size_t steps, std::size_t width,
                                            const Signature& sig) {
  if (output.size() != steps * width) throw DimensionError("decodeSteps: output size does not match steps x width");
  std::vector<std::vector<Axiom>> out(steps);
  for (std::size_t t = 0; t < steps; ++t) out[t] = decodeStatements(output.subspan(t * width, width), sig);
  return out;
}

std::vector<std::vector<Axiom>> predict(const Model& m, std::span<const double> input) {
  const auto r = forward(m, input);
  return decodeSteps(r.output, m.dims.steps, m.outputWidth(), m.signature);
}

std::vector<std::vector<Axiom>> predictIntermediate(const Model& m, std::span<const double> input) {
  if (m.stages.size() < 2)
    throw DimensionError(toString(m.arch) + " model has no intermediate layer to inspect");
  const auto r = forward(m, input);
  return decodeSteps(r.intermediate, m.dims.steps, m.stages[0].out, m.signature);
}

namespace {

constexpr const char* kCheckpointMagic = "elnn-checkpoint 1";

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

}  // namespace

void writeCheckpoint(const std::string& path, const Model& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  out << kCheckpointMagic << '\n'
      << "architecture " << toString(m.arch) << '\n'
      << "dims " << m.dims.kbWidth << ' ' << m.dims.supportWidth << ' ' << m.dims.outWidth << '\n'
      << "steps " << m.dims.steps << '\n'
      << "signature " << m.signature.maxConcepts << ' ' << m.signature.maxRoles << '\n'
      << "seed " << m.seed << '\n'
      << "stages " << m.stages.size() << '\n';
  for (const auto& s : m.stages) out << "stage " << s.in << ' ' << s.hidden << ' ' << s.out << '\n';
  out << "params " << m.params.size() << '\n';
  for (double v : m.params) out << hexfloat(v) << '\n';
  if (!out) throw Error("failed writing checkpoint '" + path + "'");
}

Model readCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint '" + path + "'");
  auto fail = [&](const std::string& why) { return Error("checkpoint '" + path + "': " + why); };
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointMagic) throw fail("not a checkpoint file");

  auto expect = [&](const char* key) {
    std::string k;
    if (!(in >> k) || k != key) throw fail(std::string("expected '") + key + "'");
  };
  Model m;
  std::string arch;
  std::size_t nStages = 0, nParams = 0;
  expect("architecture");
  in >> arch;
  m.arch = parseArchitecture(arch);
  expect("dims");
  in >> m.dims.kbWidth >> m.dims.supportWidth >> m.dims.outWidth;
  expect("steps");
  in >> m.dims.steps;
  expect("signature");
  in >> m.signature.maxConcepts >> m.signature.maxRoles;
  expect("seed");
  in >> m.seed;
  expect("stages");
  in >> nStages;
  if (!in || nStages == 0 || nStages > 2) throw fail("bad stage count");
  std::size_t off = 0;
  for (std::size_t s = 0; s < nStages; ++s) {
    expect("stage");
    StageShape st;
    in >> st.in >> st.hidden >> st.out;
    st.offset = off;
    off += st.count();
    m.stages.push_back(st);
  }
  expect("params");
  in >> nParams;
  if (!in || nParams != off) throw fail("parameter count does not match the stage shapes");
  m.params.resize(nParams);
  std::string tok;
  for (auto& v : m.params) {
    if (!(in >> tok)) throw fail("truncated parameter list");
    char* end = nullptr;
    v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw fail("bad number '" + tok + "'");
  }
  return m;
}

void writeLossCurve(const std::string& path, std::span<const double> curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write loss curve '" + path + "'");
  out << "epoch,loss\n";
  char buf[32];
  for (std::size_t e = 0; e < curve.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%.17g", curve[e]);
    out << e + 1 << ',' << buf << '\n';
  }
}

}  // namespace elnn
