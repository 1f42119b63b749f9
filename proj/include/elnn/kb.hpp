#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace elnn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& msg)
      : Error(line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Invalid user-supplied configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

enum class NameKind : std::uint8_t { Concept, Role };

struct Concept {
  std::uint32_t index = 0;
  auto operator<=>(const Concept&) const = default;
};

struct Role {
  std::uint32_t index = 0;
  auto operator<=>(const Role&) const = default;
};

struct Name {
  NameKind kind = NameKind::Concept;
  std::uint32_t index = 0;
  auto operator<=>(const Name&) const = default;
};

struct Signature {
  std::uint32_t maxConcepts = 1;
  std::uint32_t maxRoles = 1;
  auto operator<=>(const Signature&) const = default;

  bool contains(Name n) const noexcept {
    const auto bound = n.kind == NameKind::Concept ? maxConcepts : maxRoles;
    return n.index >= 1 && n.index <= bound;
  }
};

/// The six normal forms.
enum class Form : std::uint8_t {
  Sub,        // C < D
  SubConj,    // C1 & C2 < D
  SubEx,      // C < R . D
  ExSub,      // R . C < D
  RoleSub,    // R < S
  RoleChain,  // R1 * R2 < S
};

inline constexpr std::array<Form, 6> kAllForms = {Form::Sub,   Form::SubConj, Form::SubEx,
                                                  Form::ExSub, Form::RoleSub, Form::RoleChain};

/// Number of name slots used by a form (2 or 3).
constexpr std::size_t arity(Form f) noexcept {
  return (f == Form::Sub || f == Form::RoleSub) ? 2 : 3;
}

/// Kind of name held at argument position `pos` of form `f`.
NameKind slotKind(Form f, std::size_t pos);

/// A normal-form axiom. Arguments are stored in reading order, e.g.
/// SubEx(C, R, D) holds {C, R, D}; unused trailing slots are zero.
class Axiom {
public:
  Axiom() = default;

  static Axiom sub(Concept c, Concept d) { return {Form::Sub, c.index, d.index, 0}; }
  static Axiom subConj(Concept c1, Concept c2, Concept d) {
    return {Form::SubConj, c1.index, c2.index, d.index};
  }
  static Axiom subEx(Concept c, Role r, Concept d) { return {Form::SubEx, c.index, r.index, d.index}; }
  static Axiom exSub(Role r, Concept c, Concept d) { return {Form::ExSub, r.index, c.index, d.index}; }
  static Axiom roleSub(Role r, Role s) { return {Form::RoleSub, r.index, s.index, 0}; }
  static Axiom roleChain(Role r1, Role r2, Role s) {
    return {Form::RoleChain, r1.index, r2.index, s.index};
  }
  /// Builds from raw indices; checks nothing beyond arity.
  static Axiom fromIndices(Form f, std::span<const std::uint32_t> idx);

  Form form() const noexcept { return form_; }
  std::size_t arity() const noexcept { return elnn::arity(form_); }
  std::uint32_t arg(std::size_t i) const noexcept { return args_[i]; }
  Name name(std::size_t i) const { return {slotKind(form_, i), args_[i]}; }
  std::vector<Name> names() const;

  bool isConclusionForm() const noexcept { return form_ == Form::Sub || form_ == Form::SubEx; }
  /// C < C, the tautologies the reasoner never emits.
  bool isReflexive() const noexcept { return form_ == Form::Sub && args_[0] == args_[1]; }

  bool validIn(const Signature& sig) const;

  auto operator<=>(const Axiom&) const = default;

private:
  Axiom(Form f, std::uint32_t a, std::uint32_t b, std::uint32_t c) : form_(f), args_{a, b, c} {}

  Form form_ = Form::Sub;
  std::array<std::uint32_t, 3> args_{};
};

struct AxiomHash {
  std::size_t operator()(const Axiom& a) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(a.form()) + 0x9e3779b97f4a7c15ULL;
    for (std::size_t i = 0; i < 3; ++i) h = (h ^ a.arg(i)) * 0x100000001b3ULL;
    return static_cast<std::size_t>(h);
  }
};

std::string renderName(Name n);

/// Canonical one-line rendering, e.g. "C4 < R1 . C2". Exact inverse of parseAxiom.
std::string renderAxiom(const Axiom& a);

/// Parses one canonical axiom line (no comment, no surrounding blanks required).
/// Throws ParseError with line 0; callers attach line numbers.
Axiom parseAxiom(std::string_view text);

/// Orders axioms by rendered string.
struct CanonicalLess {
  bool operator()(const Axiom& a, const Axiom& b) const { return renderAxiom(a) < renderAxiom(b); }
};

class KnowledgeBase {
public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(Signature sig) : sig_(sig) {}
  /// Validates bounds; duplicate axioms are dropped (first occurrence kept).
  KnowledgeBase(Signature sig, std::vector<Axiom> axioms);

  const Signature& signature() const noexcept { return sig_; }
  const std::vector<Axiom>& axioms() const noexcept { return axioms_; }
  std::size_t size() const noexcept { return axioms_.size(); }
  bool empty() const noexcept { return axioms_.empty(); }
  const Axiom& operator[](std::size_t i) const { return axioms_[i]; }

  /// Index of `a` in the axiom list, if present.
  std::optional<std::size_t> indexOf(const Axiom& a) const;
  bool contains(const Axiom& a) const { return indexOf(a).has_value(); }

  /// Appends unless already present; returns false on duplicate. Throws on bound violation.
  bool add(const Axiom& a);

  const std::map<Name, std::string>& labels() const noexcept { return labels_; }
  void setLabel(Name n, std::string label) { labels_[n] = std::move(label); }
  void clearLabels() { labels_.clear(); }

  bool operator==(const KnowledgeBase& o) const { return sig_ == o.sig_ && axioms_ == o.axioms_; }

private:
  Signature sig_;
  std::vector<Axiom> axioms_;
  std::unordered_map<Axiom, std::size_t, AxiomHash> index_;
  std::map<Name, std::string> labels_;
};

struct ParseResult {
  KnowledgeBase kb;
  std::vector<std::string> warnings;
};

/// Parses the canonical KB text format (header `sig <concepts> <roles>`).
ParseResult parseKBWithWarnings(std::string_view text);
KnowledgeBase parseKB(std::string_view text);
std::string renderKB(const KnowledgeBase& kb);

KnowledgeBase readKBFile(const std::string& path);
void writeKBFile(const std::string& path, const KnowledgeBase& kb);

/// Bijective renaming of concept and role indices.
struct Renaming {
  std::vector<std::uint32_t> concepts;  // concepts[i-1] = new index of Ci
  std::vector<std::uint32_t> roles;
  std::map<Name, std::string> labels;   // labels detached from the renamed KB, keyed by original name

  Name apply(Name n) const;
  Axiom apply(const Axiom& a) const;
  Renaming inverse() const;
};

struct Anonymized {
  KnowledgeBase kb;
  Renaming renaming;
};

/// Renames names by a seeded random permutation and strips labels.
Anonymized anonymize(const KnowledgeBase& kb, std::uint64_t seed);

/// Applies a renaming to every axiom; the signature is kept.
KnowledgeBase rename(const KnowledgeBase& kb, const Renaming& r);

/// Names referenced by an axiom list, with Name ordering.
std::vector<Name> usedNames(std::span<const Axiom> axioms);

/// True when the bipartite axiom/name incidence graph is connected (vacuously for <= 1 axiom).
bool isConnected(std::span<const Axiom> axioms);

}  // namespace elnn
