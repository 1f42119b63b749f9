#include "elnn/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

namespace elnn {

std::string toString(Architecture a) {
  switch (a) {
    case Architecture::Flat:
      return "flat";
    case Architecture::Deep:
      return "deep";
    case Architecture::Piecewise:
      return "piecewise";
  }
  return "?";
}

Architecture parseArchitecture(const std::string& s) {
  std::string l(s);
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "flat") return Architecture::Flat;
  if (l == "deep") return Architecture::Deep;
  if (l == "piecewise") return Architecture::Piecewise;
  throw ConfigError("unknown architecture '" + s + "' (flat, deep, piecewise)");
}

namespace {

void initStage(const StageShape& st, std::span<double> p, std::uint64_t seed, std::size_t salt) {
  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1)));
  const double gateBound = 1.0 / std::sqrt(static_cast<double>(st.in + st.hidden));
  const double readBound = 1.0 / std::sqrt(static_cast<double>(st.hidden));
  std::uniform_real_distribution<double> gate(-gateBound, gateBound), read(-readBound, readBound);
  const std::size_t gateCount = st.wxSize() + st.whSize() + st.bSize();
  for (std::size_t i = 0; i < gateCount; ++i) p[i] = gate(rng);
  for (std::size_t i = gateCount; i < p.size(); ++i) p[i] = read(rng);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// acc[0..n) += a * row[0..n)
inline void axpy(double a, const double* row, double* acc, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) acc[k] += a * row[k];
}

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

bool sameRow(const double* a, const double* b, std::size_t n) { return std::memcmp(a, b, n * sizeof(double)) == 0; }

}  // namespace

Model Model::create(Architecture arch, const ModelDims& dims, const Signature& sig, std::uint64_t seed) {
  if (dims.kbWidth == 0 || dims.outWidth == 0 || dims.steps == 0)
    throw DimensionError("model dimensions must be positive");
  Model m;
  m.arch = arch;
  m.dims = dims;
  m.signature = sig;
  m.seed = seed;
  if (arch == Architecture::Flat) {
    m.stages.push_back({dims.kbWidth, dims.outWidth, dims.outWidth, 0});
  } else {
    if (dims.supportWidth == 0) throw DimensionError("support width must be positive");
    m.stages.push_back({dims.kbWidth, dims.supportWidth, dims.supportWidth, 0});
    m.stages.push_back({dims.supportWidth, dims.outWidth, dims.outWidth, 0});
  }
  std::size_t off = 0;
  for (auto& s : m.stages) {
    s.offset = off;
    off += s.count();
  }
  m.params.resize(off);
  for (std::size_t s = 0; s < m.stages.size(); ++s) initStage(m.stages[s], m.stageParams(s), seed, s);
  return m;
}

Model Model::single(std::size_t in, std::size_t out, std::size_t steps, std::uint64_t seed, std::size_t stageSalt) {
  Model m;
  m.arch = Architecture::Flat;
  m.dims = {in, 0, out, steps};
  m.seed = seed;
  m.stages.push_back({in, out, out, 0});
  m.params.resize(m.stages[0].count());
  initStage(m.stages[0], m.stageParams(0), seed, stageSalt);
  return m;
}

std::size_t Model::paramCount(std::size_t first, std::size_t last) const {
  std::size_t n = 0;
  for (std::size_t s = first; s < last; ++s) n += stages[s].count();
  return n;
}

void stageForward(const StageShape& st, std::span<const double> p, std::span<const double> input, std::size_t steps,
                  StageCache& c) {
  const std::size_t I = st.in, H = st.hidden, G = 4 * H, O = st.out;
  if (input.size() != steps * I)
    throw DimensionError("stage input has " + std::to_string(input.size()) + " values, expected " +
                         std::to_string(steps * I));
  const double* wx = p.data();
  const double* wh = wx + st.wxSize();
  const double* b = wh + st.whSize();
  const double* wy = b + st.bSize();
  const double* by = wy + st.wySize();

  c.steps = steps;
  c.gates.assign(steps * G, 0.0);
  c.cell.assign(steps * H, 0.0);
  c.tanhCell.assign(steps * H, 0.0);
  c.hidden.assign(steps * H, 0.0);
  c.output.assign(steps * O, 0.0);

  std::vector<double> zx(G), z(G);
  for (std::size_t t = 0; t < steps; ++t) {
    const double* x = input.data() + t * I;
    // The KB input is usually identical on every step; reuse its projection.
    if (t == 0 || !sameRow(x, x - I, I)) {
      std::fill(zx.begin(), zx.end(), 0.0);
      for (std::size_t j = 0; j < I; ++j)
        if (x[j] != 0.0) axpy(x[j], wx + j * G, zx.data(), G);
    }
    for (std::size_t k = 0; k < G; ++k) z[k] = zx[k] + b[k];
    if (t > 0) {
      const double* hp = c.hidden.data() + (t - 1) * H;
      for (std::size_t k = 0; k < H; ++k)
        if (hp[k] != 0.0) axpy(hp[k], wh + k * G, z.data(), G);
    }
    double* gate = c.gates.data() + t * G;
    for (std::size_t k = 0; k < 3 * H; ++k) gate[k] = sigmoid(z[k]);
    for (std::size_t k = 3 * H; k < G; ++k) gate[k] = std::tanh(z[k]);

    double* cell = c.cell.data() + t * H;
    double* tc = c.tanhCell.data() + t * H;
    double* h = c.hidden.data() + t * H;
    const double* cp = t > 0 ? c.cell.data() + (t - 1) * H : nullptr;
    for (std::size_t k = 0; k < H; ++k) {
      const double i = gate[k], f = gate[H + k], o = gate[2 * H + k], g = gate[3 * H + k];
      cell[k] = (cp ? f * cp[k] : 0.0) + i * g;
      tc[k] = std::tanh(cell[k]);
      h[k] = o * tc[k];
    }
    double* y = c.output.data() + t * O;
    for (std::size_t o = 0; o < O; ++o) y[o] = by[o] + dot(wy + o * H, h, H);
  }
}

void stageBackward(const StageShape& st, std::span<const double> p, std::span<const double> input,
                   const StageCache& c, std::span<const double> dOutput, std::span<double> grad,
                   std::span<double> dInput) {
  const std::size_t I = st.in, H = st.hidden, G = 4 * H, O = st.out, T = c.steps;
  const double* wx = p.data();
  const double* wh = wx + st.wxSize();
  const double* wy = wh + st.whSize() + st.bSize();

  double* gwx = grad.data();
  double* gwh = gwx + st.wxSize();
  double* gb = gwh + st.whSize();
  double* gwy = gb + st.bSize();
  double* gby = gwy + st.wySize();

  std::vector<double> dhNext(H, 0.0), dcNext(H, 0.0), dh(H), dz(G), runDz(G, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    const double* dy = dOutput.data() + t * O;
    const double* h = c.hidden.data() + t * H;
    const double* gate = c.gates.data() + t * G;
    const double* tc = c.tanhCell.data() + t * H;
    const double* x = input.data() + t * I;

    std::copy(dhNext.begin(), dhNext.end(), dh.begin());
    for (std::size_t o = 0; o < O; ++o) {
      if (dy[o] == 0.0) continue;
      gby[o] += dy[o];
      axpy(dy[o], h, gwy + o * H, H);
      axpy(dy[o], wy + o * H, dh.data(), H);
    }

    const double* cp = t > 0 ? c.cell.data() + (t - 1) * H : nullptr;
    for (std::size_t k = 0; k < H; ++k) {
      const double i = gate[k], f = gate[H + k], o = gate[2 * H + k], g = gate[3 * H + k];
      const double dc = dh[k] * o * (1.0 - tc[k] * tc[k]) + dcNext[k];
      dz[k] = dc * g * i * (1.0 - i);
      dz[H + k] = (cp ? dc * cp[k] : 0.0) * f * (1.0 - f);
      dz[2 * H + k] = dh[k] * tc[k] * o * (1.0 - o);
      dz[3 * H + k] = dc * i * (1.0 - g * g);
      dcNext[k] = dc * f;
    }

    for (std::size_t k = 0; k < G; ++k) gb[k] += dz[k];
    if (t > 0) {
      const double* hp = c.hidden.data() + (t - 1) * H;
      for (std::size_t k = 0; k < H; ++k) {
        if (hp[k] != 0.0) axpy(hp[k], dz.data(), gwh + k * G, G);
        dhNext[k] = dot(wh + k * G, dz.data(), G);
      }
    }

    if (!dInput.empty()) {
      double* dx = dInput.data() + t * I;
      for (std::size_t j = 0; j < I; ++j) dx[j] = dot(wx + j * G, dz.data(), G);
    }

    // Input-weight gradient: one outer product per run of identical input rows.
    for (std::size_t k = 0; k < G; ++k) runDz[k] += dz[k];
    if (t == 0 || !sameRow(x, x - I, I)) {
      for (std::size_t j = 0; j < I; ++j)
        if (x[j] != 0.0) axpy(x[j], runDz.data(), gwx + j * G, G);
      std::fill(runDz.begin(), runDz.end(), 0.0);
    }
  }
}

std::vector<std::vector<double>> forwardStages(const Model& m, std::span<const double> input, std::size_t first,
                                               std::size_t last) {
  const auto T = m.dims.steps;
  std::vector<std::vector<double>> outs;
  StageCache cache;
  std::vector<double> cur(input.begin(), input.end());
  for (std::size_t s = first; s < last; ++s) {
    stageForward(m.stages[s], m.stageParams(s), cur, T, cache);
    cur = cache.output;
    outs.push_back(cache.output);
  }
  return outs;
}

ForwardResult forward(const Model& m, std::span<const double> input) {
  auto outs = forwardStages(m, input, 0, m.stages.size());
  ForwardResult r;
  r.output = std::move(outs.back());
  if (outs.size() > 1) r.intermediate = std::move(outs.front());
  return r;
}

double mseLoss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size())
    throw DimensionError("mseLoss: shapes differ (" + std::to_string(pred.size()) + " vs " +
                         std::to_string(target.size()) + ")");
  if (pred.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

}  // namespace elnn
