#include "elnn/encode.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace elnn {

namespace {

constexpr Name kPad{NameKind::Concept, 0};

// Slot kind pattern per form: 'P' padding, 'C' concept, 'R' role.
struct Layout {
  Form form;
  const char* pattern;
  std::array<int, 4> argAt;  // which axiom argument fills each slot, -1 for padding
};

constexpr Layout kLayouts[] = {
    {Form::Sub, "PCCP", {-1, 0, 1, -1}},      {Form::SubConj, "CCCP", {0, 1, 2, -1}},
    {Form::SubEx, "PCRC", {-1, 0, 1, 2}},     {Form::ExSub, "RCCP", {0, 1, 2, -1}},
    {Form::RoleSub, "PRRP", {-1, 0, 1, -1}},  {Form::RoleChain, "RRRP", {0, 1, 2, -1}},
};

const Layout& layoutOf(Form f) {
  for (const auto& l : kLayouts)
    if (l.form == f) return l;
  throw Error("unknown form");
}

}  // namespace

std::array<Name, 4> slotLayout(const Axiom& a) {
  const auto& l = layoutOf(a.form());
  std::array<Name, 4> out{kPad, kPad, kPad, kPad};
  for (std::size_t s = 0; s < 4; ++s)
    if (l.argAt[s] >= 0) out[s] = a.name(static_cast<std::size_t>(l.argAt[s]));
  return out;
}

Encoded4 encodeAxiom(const Axiom& a, const Signature& sig) {
  if (!a.validIn(sig)) throw Error("encodeAxiom: '" + renderAxiom(a) + "' is outside the signature");
  Encoded4 e{0.0, 0.0, 0.0, 0.0};
  const auto slots = slotLayout(a);
  for (std::size_t s = 0; s < 4; ++s) {
    const auto& n = slots[s];
    if (n.index == 0) continue;
    e[s] = n.kind == NameKind::Concept ? static_cast<double>(n.index) / sig.maxConcepts
                                       : -static_cast<double>(n.index) / sig.maxRoles;
  }
  return e;
}

std::optional<Axiom> decodeAxiom(std::span<const double, 4> e, const Signature& sig) {
  char pattern[5] = {};
  std::array<std::uint32_t, 4> idx{};
  for (std::size_t s = 0; s < 4; ++s) {
    const double v = std::clamp(e[s], -1.0, 1.0);
    pattern[s] = 'P';
    if (!(v > 0.0) && !(v < 0.0)) continue;  // zero or NaN
    const bool isConcept = v > 0.0;
    const auto bound = isConcept ? sig.maxConcepts : sig.maxRoles;
    const auto k = static_cast<std::uint32_t>(std::min<double>(std::round(std::abs(v) * bound), bound));
    if (k == 0) continue;
    pattern[s] = isConcept ? 'C' : 'R';
    idx[s] = k;
  }
  for (const auto& l : kLayouts) {
    if (std::strcmp(l.pattern, pattern) != 0) continue;
    std::array<std::uint32_t, 3> args{};
    for (std::size_t s = 0; s < 4; ++s)
      if (l.argAt[s] >= 0) args[static_cast<std::size_t>(l.argAt[s])] = idx[s];
    return Axiom::fromIndices(l.form, std::span(args.data(), arity(l.form)));
  }
  return std::nullopt;
}

std::vector<double> encodeAxioms(std::span<const Axiom> axioms, const Signature& sig) {
  std::vector<double> out;
  out.reserve(4 * axioms.size());
  for (const auto& a : axioms) {
    const auto e = encodeAxiom(a, sig);
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

std::vector<double> encodeKB(const KnowledgeBase& kb, const Signature& sig) { return encodeAxioms(kb.axioms(), sig); }
std::vector<double> encodeKB(const KnowledgeBase& kb) { return encodeKB(kb, kb.signature()); }

std::vector<Axiom> decodeStatements(std::span<const double> flat, const Signature& sig) {
  std::vector<Axiom> out;
  for (std::size_t i = 0; i + 4 <= flat.size(); i += 4)
    if (auto a = decodeAxiom(flat.subspan(i).first<4>(), sig)) out.push_back(*a);
  return out;
}

Sample prepareSample(KnowledgeBase kb, std::string source) {
  auto trace = saturate(kb);
  auto supports = extractSupports(trace);
  return {std::move(kb), std::move(trace), std::move(supports), std::move(source)};
}

std::vector<Sample> prepareSamples(std::span<const KnowledgeBase> kbs, std::span<const std::string> sources) {
  std::vector<Sample> out(kbs.size());
  const auto n = static_cast<long>(kbs.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i)
    out[i] = prepareSample(kbs[i], static_cast<std::size_t>(i) < sources.size() ? sources[i] : std::string{});
  return out;
}

DatasetTensors buildDataset(std::span<const Sample> samples) {
  if (samples.empty()) throw DatasetError("buildDataset: no samples");
  DatasetTensors d;
  std::size_t steps = 0, maxAxioms = 0, maxNew = 0;
  Signature sig{1, 1};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.trace.steps.empty())
      throw DatasetError("buildDataset: sample " + std::to_string(i) +
                         (s.source.empty() ? "" : " (" + s.source + ")") + " has an empty reasoning trace");
    steps = std::max(steps, s.trace.length());
    maxAxioms = std::max(maxAxioms, s.kb.size());
    for (const auto& step : s.trace.steps) maxNew = std::max(maxNew, step.size());
    sig.maxConcepts = std::max(sig.maxConcepts, s.kb.signature().maxConcepts);
    sig.maxRoles = std::max(sig.maxRoles, s.kb.signature().maxRoles);
  }

  const std::size_t n = samples.size(), kbWidth = 4 * maxAxioms, outWidth = 4 * maxNew;
  d.X = Tensor3(n, steps, kbWidth);
  d.S = Tensor3(n, steps, kbWidth);
  d.Y = Tensor3(n, steps, outWidth);
  d.signature = sig;
  d.maxKbAxioms = maxAxioms;

  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = samples[i];
    const auto kbVec = encodeKB(s.kb, sig);
    for (std::size_t t = 0; t < steps; ++t) std::copy(kbVec.begin(), kbVec.end(), d.X.row(i, t).begin());

    for (std::size_t t = 0; t < s.trace.length(); ++t) {
      std::vector<Axiom> support;
      for (auto k : stepSupportUnion(s.trace, s.supports, t + 1)) support.push_back(s.kb[k]);
      const auto sVec = encodeAxioms(support, sig);
      std::copy(sVec.begin(), sVec.end(), d.S.row(i, t).begin());

      std::vector<Axiom> fresh;
      for (const auto& der : s.trace.steps[t]) fresh.push_back(der.conclusion);
      const auto yVec = encodeAxioms(fresh, sig);
      std::copy(yVec.begin(), yVec.end(), d.Y.row(i, t).begin());
    }
    d.traceLengths.push_back(s.trace.length());
    d.sources.push_back(s.source);
  }
  return d;
}

Tensor3 encodeInput(const KnowledgeBase& kb, const DatasetTensors& shape) {
  if (4 * kb.size() > shape.kbWidth())
    throw DatasetError("KB with " + std::to_string(kb.size()) + " axioms does not fit input width " +
                       std::to_string(shape.kbWidth()));
  Tensor3 x(1, shape.steps(), shape.kbWidth());
  const auto v = encodeKB(kb, shape.signature);
  for (std::size_t t = 0; t < shape.steps(); ++t) std::copy(v.begin(), v.end(), x.row(0, t).begin());
  return x;
}

namespace {

constexpr char kMagic[8] = {'E', 'L', 'N', 'N', 'D', 'S', '0', '1'};

template <typename T>
T toLittle(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

void putU64(std::ostream& out, std::uint64_t v) {
  v = toLittle(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t getU64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return toLittle(v);
}

void putDoubles(std::ostream& out, const std::vector<double>& xs) {
  for (double x : xs) {
    x = toLittle(x);
    out.write(reinterpret_cast<const char*>(&x), sizeof x);
  }
}

void getDoubles(std::istream& in, std::vector<double>& xs) {
  for (auto& x : xs) {
    in.read(reinterpret_cast<char*>(&x), sizeof x);
    x = toLittle(x);
  }
}

}  // namespace

void writeDataset(const std::string& path, const DatasetTensors& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset '" + path + "'");
  out.write(kMagic, sizeof kMagic);
  for (std::uint64_t v : {d.X.samples, d.X.steps, d.X.width, d.S.width, d.Y.width,
                          std::size_t{d.signature.maxConcepts}, std::size_t{d.signature.maxRoles}})
    putU64(out, v);
  putDoubles(out, d.X.data);
  putDoubles(out, d.S.data);
  putDoubles(out, d.Y.data);
}

DatasetTensors readDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset '" + path + "'");
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw Error("'" + path + "' is not a dataset file");
  const auto n = getU64(in), t = getU64(in), kw = getU64(in), sw = getU64(in), ow = getU64(in);
  DatasetTensors d;
  d.signature.maxConcepts = static_cast<std::uint32_t>(getU64(in));
  d.signature.maxRoles = static_cast<std::uint32_t>(getU64(in));
  d.X = Tensor3(n, t, kw);
  d.S = Tensor3(n, t, sw);
  d.Y = Tensor3(n, t, ow);
  getDoubles(in, d.X.data);
  getDoubles(in, d.S.data);
  getDoubles(in, d.Y.data);
  if (!in) throw Error("dataset '" + path + "' is truncated");
  d.maxKbAxioms = kw / 4;
  return d;
}

void writeDatasetIndex(const std::string& path, const DatasetTensors& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset index '" + path + "'");
  out << "sample\ttrace_length\tsource\n";
  for (std::size_t i = 0; i < d.traceLengths.size(); ++i)
    out << i << '\t' << d.traceLengths[i] << '\t' << (i < d.sources.size() ? d.sources[i] : "") << '\n';
}

}  // namespace elnn
