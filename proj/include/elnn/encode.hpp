#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "elnn/kb.hpp"
#include "elnn/reasoner.hpp"
#include "elnn/supports.hpp"
#include "elnn/tensor.hpp"

namespace elnn {

/// Four slots: 0.0 padding, index/maxConcepts for a concept, -index/maxRoles for a role.
///
///   C < D          [0,  c,  d,  0]
///   C1 & C2 < D    [c1, c2, d,  0]
///   C < R . D      [0,  c,  r,  d]
///   R . C < D      [r,  c,  d,  0]
///   R < S          [0,  r,  s,  0]
///   R1 * R2 < S    [r1, r2, s,  0]
using Encoded4 = std::array<double, 4>;

/// Slot contents of an axiom under the layout above; index 0 marks padding.
std::array<Name, 4> slotLayout(const Axiom& a);

/// Throws if a name is outside `sig`.
Encoded4 encodeAxiom(const Axiom& a, const Signature& sig);

/// Rounds each slot to the nearest index (half away from zero, clamped to the
/// signature); returns nothing for all-padding or a slot pattern matching no form.
std::optional<Axiom> decodeAxiom(std::span<const double, 4> e, const Signature& sig);
inline std::optional<Axiom> decodeAxiom(const Encoded4& e, const Signature& sig) {
  return decodeAxiom(std::span<const double, 4>(e), sig);
}

/// Concatenated encodings in KB order, 4 * |axioms| values.
std::vector<double> encodeKB(const KnowledgeBase& kb);
std::vector<double> encodeKB(const KnowledgeBase& kb, const Signature& sig);
std::vector<double> encodeAxioms(std::span<const Axiom> axioms, const Signature& sig);

/// Decodes consecutive 4-tuples, dropping the ones that decode to nothing.
std::vector<Axiom> decodeStatements(std::span<const double> flat, const Signature& sig);

/// A KB with its trace and supports, the unit the dataset is built from.
struct Sample {
  KnowledgeBase kb;
  ReasoningTrace trace;
  SupportMap supports;
  std::string source;  // where the KB came from, for the sidecar index
};

Sample prepareSample(KnowledgeBase kb, std::string source = {});
/// Parallel over KBs; order preserved.
std::vector<Sample> prepareSamples(std::span<const KnowledgeBase> kbs, std::span<const std::string> sources = {});

struct DatasetTensors {
  Tensor3 X;  // KB vector replicated on every step
  Tensor3 S;  // support axioms of the step's conclusions, KB order
  Tensor3 Y;  // conclusions new at the step, canonical order
  Signature signature;  // dataset-wide maxima used for scaling
  std::size_t maxKbAxioms = 0;
  std::vector<std::size_t> traceLengths;
  std::vector<std::string> sources;

  std::size_t steps() const noexcept { return X.steps; }
  std::size_t kbWidth() const noexcept { return X.width; }
  std::size_t supportWidth() const noexcept { return S.width; }
  std::size_t outWidth() const noexcept { return Y.width; }
  /// Statements the output tensor can hold per sample.
  std::size_t outputCapacity() const noexcept { return steps() * outWidth() / 4; }
};

class DatasetError : public Error {
public:
  using Error::Error;
};

/// Throws DatasetError for an empty list or a sample whose trace is empty.
DatasetTensors buildDataset(std::span<const Sample> samples);

/// Replicated, zero-padded input rows for one KB at the dataset's scale and width.
Tensor3 encodeInput(const KnowledgeBase& kb, const DatasetTensors& shape);

/// Binary layout, little-endian: magic "ELNNDS01", seven uint64 (samples, steps,
/// kbWidth, supportWidth, outWidth, maxConcepts, maxRoles), then X, S and Y as float64.
void writeDataset(const std::string& path, const DatasetTensors& d);
DatasetTensors readDataset(const std::string& path);
/// Tab-separated `sample  trace_length  source`.
void writeDatasetIndex(const std::string& path, const DatasetTensors& d);

}  // namespace elnn
