#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "elnn/kb.hpp"

namespace elnn {

/// General concept expression: names, conjunction, existential restriction.
/// Top, Bottom and Self parse but are rejected by the normalizer.
struct ConceptExpr {
  enum class Kind { Name, And, Exists, Top, Bottom, Self };
  Kind kind = Kind::Name;
  std::uint32_t index = 0;  // concept index for Name, role index for Exists/Self
  std::vector<ConceptExpr> children;

  static ConceptExpr name(std::uint32_t c) { return {Kind::Name, c, {}}; }
  static ConceptExpr exists(std::uint32_t r, ConceptExpr filler) { return {Kind::Exists, r, {std::move(filler)}}; }
  static ConceptExpr conj(std::vector<ConceptExpr> parts) { return {Kind::And, 0, std::move(parts)}; }
};

struct GeneralAxiom {
  enum class Kind { Subsumption, Equivalence, RoleInclusion };
  Kind kind = Kind::Subsumption;
  ConceptExpr lhs;
  ConceptExpr rhs;
  std::vector<std::uint32_t> chain;  // role inclusion: chain[0] * ... * chain[n-1] < superRole
  std::uint32_t superRole = 0;

  std::string render() const;
};

/// Parses `expr < expr`, `expr = expr` or `R1 * R2 * ... < S`.
/// Expressions: `C3`, `Top`, `Bottom`, `R1 . expr`, `R1 . Self`, `expr & expr`, `( expr )`.
GeneralAxiom parseGeneralAxiom(std::string_view text);

GeneralAxiom toGeneral(const Axiom& a);

class NormalizeError : public Error {
public:
  NormalizeError(std::string axiom, const std::string& why)
      : Error("cannot normalize '" + axiom + "': " + why), axiom_(std::move(axiom)) {}
  const std::string& axiom() const noexcept { return axiom_; }

private:
  std::string axiom_;
};

/// Incremental normalizer. Fresh concept and role names are allocated from
/// the signature bound upward, so original indices never move.
class Normalizer {
public:
  explicit Normalizer(Signature sig) : input_(sig), sig_(sig) {}

  /// Throws NormalizeError (emitting nothing) if the axiom is outside EL+.
  void add(const GeneralAxiom& ax);

  const std::vector<Axiom>& axioms() const noexcept { return out_; }
  const Signature& signature() const noexcept { return sig_; }

private:
  void sub(const ConceptExpr& lhs, const ConceptExpr& rhs);
  void conjunctionSub(std::vector<std::uint32_t> names, std::uint32_t rhs);
  void emit(const Axiom& a);
  std::uint32_t freshConcept() { return ++sig_.maxConcepts; }
  std::uint32_t freshRole() { return ++sig_.maxRoles; }

  Signature input_;
  Signature sig_;
  std::vector<Axiom> out_;
  std::unordered_set<Axiom, AxiomHash> seen_;
};

struct Normalized {
  std::vector<Axiom> axioms;
  Signature signature;
};

/// Rewrites general EL+ axioms into the six normal forms over a grown signature.
Normalized normalize(std::span<const GeneralAxiom> axioms, Signature sig);

}  // namespace elnn
