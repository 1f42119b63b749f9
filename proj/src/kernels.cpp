#include "elnn/kernels.hpp"

// Threads are assigned by the fixed blocking below, never by Eigen.
#define EIGEN_DONT_PARALLELIZE
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace elnn {

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const Mat>;
using Row = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using CRowMap = Eigen::Map<const Row>;
using MatMap = Eigen::Map<Mat>;

constexpr Eigen::Index kBlocks = static_cast<Eigen::Index>(kProductBlocks);

void checkShapes(const Model& m, std::size_t first, std::size_t last, const Tensor3& input, const Tensor3& target) {
  if (first >= last || last > m.stages.size()) throw DimensionError("invalid stage range");
  if (input.width != m.stages[first].in || target.width != m.stages[last - 1].out)
    throw DimensionError("tensor widths do not match stages: input " + std::to_string(input.width) + " vs " +
                         std::to_string(m.stages[first].in) + ", target " + std::to_string(target.width) + " vs " +
                         std::to_string(m.stages[last - 1].out));
  if (input.steps != m.dims.steps || target.steps != m.dims.steps || input.samples != target.samples)
    throw DimensionError("tensor step or sample counts do not match the model");
}

// c (=|+=) a * b, split into at most kBlocks fixed column blocks of c.
template <typename Dst, typename Lhs, typename Rhs>
void product(Dst&& c, const Lhs& a, const Rhs& b, bool add) {
  const Eigen::Index cols = c.cols();
  const Eigen::Index blocks = std::min(kBlocks, cols);
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < blocks; ++k) {
    const Eigen::Index j0 = cols * k / blocks, w = cols * (k + 1) / blocks - j0;
    if (add)
      c.middleCols(j0, w).noalias() += a * b.middleCols(j0, w);
    else
      c.middleCols(j0, w).noalias() = a * b.middleCols(j0, w);
  }
}

// Column sums, each column summed top to bottom.
template <typename Src>
void columnSums(const Src& m, double* out) {
  const Eigen::Index cols = m.cols();
  for (Eigen::Index j = 0; j < cols; ++j) out[j] = 0.0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index j = 0; j < cols; ++j) out[j] += m(r, j);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Params {
  CMap wx, wh;
  CRowMap b;
  CMap wy;
  CRowMap by;

  Params(const StageShape& st, std::span<const double> p)
      : wx(p.data(), st.in, 4 * st.hidden),
        wh(p.data() + st.wxSize(), st.hidden, 4 * st.hidden),
        b(p.data() + st.wxSize() + st.whSize(), 4 * st.hidden),
        wy(p.data() + st.wxSize() + st.whSize() + st.bSize(), st.out, st.hidden),
        by(p.data() + st.wxSize() + st.whSize() + st.bSize() + st.wySize(), st.out) {}
};

// All matrices hold T*N rows ordered step-major: row t*N + n is sample n at step t.
struct StageState {
  Mat x, gates, cell, tanhCell, hidden, output;
  std::vector<char> repeats;  // repeats[t]: the whole batch input at t equals that at t-1
};

struct Batch {
  std::vector<StageState> stages;
  Mat zx, z, dOut, dIn, dHidden, dz, dhNext, dcNext, runSum;
};

void stageForwardBatch(const StageShape& st, std::span<const double> p, std::size_t T, std::size_t N, StageState& s,
                       Batch& b) {
  const Eigen::Index H = static_cast<Eigen::Index>(st.hidden), G = 4 * H, n = static_cast<Eigen::Index>(N);
  const Params P(st, p);
  s.gates.resize(T * N, G);
  s.cell.resize(T * N, H);
  s.tanhCell.resize(T * N, H);
  s.hidden.resize(T * N, H);
  s.repeats.assign(T, 0);
  b.zx.resize(n, G);
  b.z.resize(n, G);
  const std::size_t rowBytes = N * st.in * sizeof(double);

  for (std::size_t t = 0; t < T; ++t) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(t * N);
    const auto xt = s.x.middleRows(r0, n);
    s.repeats[t] = t > 0 && std::memcmp(xt.data(), s.x.middleRows(r0 - n, n).data(), rowBytes) == 0;
    if (!s.repeats[t]) product(b.zx, xt, P.wx, false);
    b.z = b.zx;
    if (t > 0) product(b.z, s.hidden.middleRows(r0 - n, n), P.wh, true);

#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index r = r0 + i;
      double* g = s.gates.row(r).data();
      const double* zi = b.z.row(i).data();
      for (Eigen::Index k = 0; k < 3 * H; ++k) g[k] = sigmoid(zi[k] + P.b[k]);
      for (Eigen::Index k = 3 * H; k < G; ++k) g[k] = std::tanh(zi[k] + P.b[k]);
      for (Eigen::Index k = 0; k < H; ++k) {
        const double prev = t > 0 ? s.cell(r - n, k) : 0.0;
        const double c = g[H + k] * prev + g[k] * g[3 * H + k];
        s.cell(r, k) = c;
        s.tanhCell(r, k) = std::tanh(c);
        s.hidden(r, k) = g[2 * H + k] * s.tanhCell(r, k);
      }
    }
  }
  s.output.resize(T * N, st.out);
  product(s.output, s.hidden, P.wy.transpose(), false);
  s.output.rowwise() += P.by;
}

// dOut holds d loss / d output of this stage; on return grad holds this stage's
// gradient and, when wantInput, b.dIn holds d loss / d input.
void stageBackwardBatch(const StageShape& st, std::span<const double> p, std::size_t T, std::size_t N,
                        const StageState& s, Batch& b, std::span<double> grad, bool wantInput) {
  const Eigen::Index H = static_cast<Eigen::Index>(st.hidden), G = 4 * H, n = static_cast<Eigen::Index>(N);
  const Eigen::Index I = static_cast<Eigen::Index>(st.in), O = static_cast<Eigen::Index>(st.out);
  const Params P(st, p);
  double* g = grad.data();
  MatMap gwx(g, I, G), gwh(g + st.wxSize(), H, G);
  double* gb = g + st.wxSize() + st.whSize();
  MatMap gwy(gb + st.bSize(), O, H);
  double* gby = gb + st.bSize() + st.wySize();

  b.dHidden.resize(T * N, H);
  product(b.dHidden, b.dOut, P.wy, false);
  b.dz.resize(T * N, G);
  b.dhNext.setZero(n, H);
  b.dcNext.setZero(n, H);

  for (std::size_t t = T; t-- > 0;) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(t * N);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index r = r0 + i;
      const double* gt = s.gates.row(r).data();
      double* dz = b.dz.row(r).data();
      for (Eigen::Index k = 0; k < H; ++k) {
        const double ig = gt[k], fg = gt[H + k], og = gt[2 * H + k], cg = gt[3 * H + k];
        const double tc = s.tanhCell(r, k);
        const double dh = b.dHidden(r, k) + b.dhNext(i, k);
        const double dc = dh * og * (1.0 - tc * tc) + b.dcNext(i, k);
        const double prev = t > 0 ? s.cell(r - n, k) : 0.0;
        dz[k] = dc * cg * ig * (1.0 - ig);
        dz[H + k] = dc * prev * fg * (1.0 - fg);
        dz[2 * H + k] = dh * tc * og * (1.0 - og);
        dz[3 * H + k] = dc * ig * (1.0 - cg * cg);
        b.dcNext(i, k) = dc * fg;
      }
    }
    if (t > 0) product(b.dhNext, b.dz.middleRows(r0, n), P.wh.transpose(), false);
  }

  product(gwy, b.dOut.transpose(), s.hidden, false);
  columnSums(b.dOut, gby);
  columnSums(b.dz, gb);
  const Eigen::Index tail = static_cast<Eigen::Index>((T - 1) * N);
  if (T > 1)
    product(gwh, s.hidden.topRows(tail).transpose(), b.dz.bottomRows(tail), false);
  else
    gwh.setZero();

  // Input weights: one product per run of steps whose batch input repeats.
  bool first = true;
  for (std::size_t t0 = 0; t0 < T;) {
    std::size_t t1 = t0 + 1;
    while (t1 < T && s.repeats[t1]) ++t1;
    b.runSum = b.dz.middleRows(static_cast<Eigen::Index>(t0 * N), n);
    for (std::size_t t = t0 + 1; t < t1; ++t) b.runSum += b.dz.middleRows(static_cast<Eigen::Index>(t * N), n);
    product(gwx, s.x.middleRows(static_cast<Eigen::Index>(t0 * N), n).transpose(), b.runSum, !first);
    first = false;
    t0 = t1;
  }

  if (wantInput) {
    b.dIn.resize(T * N, I);
    product(b.dIn, b.dz, P.wx.transpose(), false);
  }
}

double batched(const Model& m, std::size_t first, std::size_t last, const Tensor3& input, const Tensor3& target,
               std::span<const std::size_t> samples, std::span<double> grad) {
  checkShapes(m, first, last, input, target);
  const std::size_t N = samples.size(), T = m.dims.steps, S = last - first;
  if (N == 0) throw DimensionError("no samples");
  thread_local Batch b;
  b.stages.resize(S);

  auto& x0 = b.stages[0].x;
  x0.resize(static_cast<Eigen::Index>(T * N), static_cast<Eigen::Index>(input.width));
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < N; ++i) {
      const auto row = input.row(samples[i], t);
      std::copy(row.begin(), row.end(), x0.row(static_cast<Eigen::Index>(t * N + i)).data());
    }
  for (std::size_t k = 0; k < S; ++k) {
    if (k > 0) b.stages[k].x = b.stages[k - 1].output;
    stageForwardBatch(m.stages[first + k], m.stageParams(first + k), T, N, b.stages[k], b);
  }

  const auto& out = b.stages[S - 1].output;
  const Eigen::Index O = out.cols();
  const double scale = 1.0 / static_cast<double>(N * T * static_cast<std::size_t>(O));
  b.dOut.resize(out.rows(), O);
  double sq = 0.0;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < N; ++i) {
      const auto r = static_cast<Eigen::Index>(t * N + i);
      const auto y = target.row(samples[i], t);
      for (Eigen::Index k = 0; k < O; ++k) {
        const double d = out(r, k) - y[static_cast<std::size_t>(k)];
        sq += d * d;
        b.dOut(r, k) = 2.0 * scale * d;
      }
    }
  if (grad.empty()) return sq * scale;

  const std::size_t base = m.stages[first].offset;
  for (std::size_t k = S; k-- > 0;) {
    const auto& st = m.stages[first + k];
    stageBackwardBatch(st, m.stageParams(first + k), T, N, b.stages[k], b, grad.subspan(st.offset - base, st.count()),
                       k > 0);
    if (k > 0) std::swap(b.dOut, b.dIn);
  }
  return sq * scale;
}

// Reference path: one sample at a time through the per-sample LSTM code.
struct Workspace {
  std::vector<StageCache> caches;
  std::vector<std::vector<double>> inputs;
  std::vector<double> dOut, dIn;
};

double sampleTerm(const Model& m, std::size_t first, std::size_t last, std::span<const double> x,
                  std::span<const double> y, double scale, std::span<double> grad, Workspace& w) {
  const std::size_t T = m.dims.steps, n = last - first;
  w.caches.resize(n);
  w.inputs.resize(n);
  w.inputs[0].assign(x.begin(), x.end());
  for (std::size_t s = 0; s < n; ++s) {
    stageForward(m.stages[first + s], m.stageParams(first + s), w.inputs[s], T, w.caches[s]);
    if (s + 1 < n) w.inputs[s + 1] = w.caches[s].output;
  }
  const auto& out = w.caches[n - 1].output;
  double sq = 0.0;
  w.dOut.resize(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double d = out[k] - y[k];
    sq += d * d;
    w.dOut[k] = 2.0 * scale * d;
  }
  const std::size_t base = m.stages[first].offset;
  for (std::size_t s = n; s-- > 0;) {
    const auto& st = m.stages[first + s];
    if (s > 0) w.dIn.assign(T * st.in, 0.0);
    stageBackward(st, m.stageParams(first + s), w.inputs[s], w.caches[s], w.dOut,
                  grad.subspan(st.offset - base, st.count()), s > 0 ? std::span<double>(w.dIn) : std::span<double>());
    if (s > 0) std::swap(w.dOut, w.dIn);
  }
  return sq;
}

}  // namespace

double lossAndGradient(const Model& m, std::size_t first, std::size_t last, const Tensor3& input,
                       const Tensor3& target, std::span<const std::size_t> samples, std::span<double> grad) {
  if (grad.size() != m.paramCount(first, last)) throw DimensionError("gradient buffer has the wrong size");
  return batched(m, first, last, input, target, samples, grad);
}

double lossAndGradientSerial(const Model& m, std::size_t first, std::size_t last, const Tensor3& input,
                             const Tensor3& target, std::span<const std::size_t> samples, std::span<double> grad) {
  checkShapes(m, first, last, input, target);
  if (grad.size() != m.paramCount(first, last)) throw DimensionError("gradient buffer has the wrong size");
  if (samples.empty()) throw DimensionError("no samples");
  const double scale = 1.0 / static_cast<double>(samples.size() * m.dims.steps * m.stages[last - 1].out);
  std::fill(grad.begin(), grad.end(), 0.0);
  Workspace w;
  double total = 0.0;
  for (auto i : samples) total += sampleTerm(m, first, last, input.sample(i), target.sample(i), scale, grad, w);
  return total * scale;
}

double batchLoss(const Model& m, std::size_t first, std::size_t last, const Tensor3& input, const Tensor3& target,
                 std::span<const std::size_t> samples) {
  return batched(m, first, last, input, target, samples, {});
}

}  // namespace elnn
