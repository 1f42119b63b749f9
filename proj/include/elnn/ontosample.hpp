#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "elnn/kb.hpp"

namespace elnn {

struct LoadedOntology {
  KnowledgeBase kb;
  std::size_t skipped = 0;              // axioms outside EL+ (self restriction, Top, Bottom)
  std::vector<std::string> skippedText;
};

/// Reads an axiom dump. The `sig` header is optional; without it the signature
/// is the largest index seen. Lines may be canonical normal forms or general
/// EL+ axioms (nesting, `=`, longer role chains), which are normalized.
LoadedOntology loadOntology(const std::string& path);
LoadedOntology parseOntology(std::string_view text);

struct SampleConfig {
  std::size_t size = 20;
  std::size_t minSteps = 1;
  std::size_t retries = 1000;
  std::uint64_t seed = 0;
};

class SamplingFailure : public Error {
public:
  SamplingFailure(const std::string& msg, std::size_t bestSteps) : Error(msg), bestSteps_(bestSteps) {}
  std::size_t bestSteps() const noexcept { return bestSteps_; }

private:
  std::size_t bestSteps_;
};

/// Connected sub-KB grown by random frontier expansion on the axiom/name graph,
/// retried until its trace has at least `minSteps` steps. The result is
/// compacted to the names it uses and anonymized.
KnowledgeBase sampleConnected(const KnowledgeBase& kb, const SampleConfig& cfg);

/// Renumbers the used names densely (in first-use order) and shrinks the signature to fit.
KnowledgeBase compactNames(const KnowledgeBase& kb);

}  // namespace elnn
