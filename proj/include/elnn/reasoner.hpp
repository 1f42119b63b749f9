#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "elnn/kb.hpp"

namespace elnn {

/// Completion rules, numbered 1..6:
///   1  A<B, B<C                  => A<C
///   2  A<B1, A<B2, B1&B2<C       => A<C
///   3  A<B, B<R.C                => A<R.C
///   4  A<R.B, B<C, R.C<D         => A<D
///   5  A<R.B, R<S                => A<S.B
///   6  A<R1.B, B<R2.C, R1*R2<S   => A<S.C
/// Reflexive premises X<X are always available but never listed or emitted.
using RuleId = int;
inline constexpr RuleId kRuleCount = 6;

struct Derivation {
  Axiom conclusion;
  RuleId rule = 0;
  std::vector<Axiom> premises;  // in rule order, reflexive premises omitted

  bool operator==(const Derivation&) const = default;
};

struct ReasoningTrace {
  KnowledgeBase kb;
  /// steps[t-1] holds the conclusions first derived at step t, in canonical order.
  std::vector<std::vector<Derivation>> steps;

  std::size_t length() const noexcept { return steps.size(); }
};

class UnsupportedQuery : public Error {
public:
  using Error::Error;
};

/// Breadth-first saturation: step t holds every statement derivable by one rule
/// application from the KB and steps < t that is not already known.
ReasoningTrace saturate(const KnowledgeBase& kb);

/// Only Sub and SubEx queries are supported.
bool entails(const KnowledgeBase& kb, const Axiom& query);

std::set<Axiom> completionSet(const ReasoningTrace& trace);

/// Rule ids of every derivation, step by step.
std::vector<RuleId> ruleIds(const ReasoningTrace& trace);

/// One line per derivation: `step <t> | rule <k> | <axiom> <= <premise>; <premise>`.
std::string dumpTrace(const ReasoningTrace& trace);

/// Saturates every KB; the parallel kernel and the serial reference return identical traces.
std::vector<ReasoningTrace> saturateAll(std::span<const KnowledgeBase> kbs);
std::vector<ReasoningTrace> saturateAllSerial(std::span<const KnowledgeBase> kbs);

}  // namespace elnn
