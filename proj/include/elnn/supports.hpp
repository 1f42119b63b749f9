#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "elnn/reasoner.hpp"

namespace elnn {

/// Conclusion -> sorted positions of the KB axioms it rests on.
struct SupportMap {
  std::map<Axiom, std::vector<std::size_t>> entries;  // derived conclusions only
  std::map<Axiom, std::vector<std::size_t>> kbAxioms;  // singleton supports of the KB's own axioms

  /// Support of a conclusion, or the singleton index of a KB axiom.
  const std::vector<std::size_t>& of(const Axiom& a) const;
  std::size_t size() const noexcept { return entries.size(); }
};

/// Raised when a premise is neither a KB axiom nor an earlier conclusion.
class InconsistentTrace : public Error {
public:
  using Error::Error;
};

/// Walks the trace forward, replacing each derived premise by its own support.
SupportMap extractSupports(const ReasoningTrace& trace);

/// Sorted union of the supports of the conclusions derived at step t (1-based).
std::vector<std::size_t> stepSupportUnion(const ReasoningTrace& trace, const SupportMap& sm, std::size_t t);

/// `<axiom> :: <i1>,<i2>,...`, one line per conclusion in trace order.
std::string dumpSupports(const ReasoningTrace& trace, const SupportMap& sm);

}  // namespace elnn
