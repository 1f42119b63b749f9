#include "elnn/normalize.hpp"

#include <cctype>
#include <charconv>
#include <optional>

namespace elnn {

namespace {

std::string renderExpr(const ConceptExpr& e, bool nested) {
  switch (e.kind) {
    case ConceptExpr::Kind::Name:
      return "C" + std::to_string(e.index);
    case ConceptExpr::Kind::Top:
      return "Top";
    case ConceptExpr::Kind::Bottom:
      return "Bottom";
    case ConceptExpr::Kind::Self:
      return "R" + std::to_string(e.index) + " . Self";
    case ConceptExpr::Kind::Exists:
      return "R" + std::to_string(e.index) + " . " + renderExpr(e.children.front(), true);
    case ConceptExpr::Kind::And: {
      std::string s;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) s += " & ";
        s += renderExpr(e.children[i], true);
      }
      return nested ? "(" + s + ")" : s;
    }
  }
  return {};
}

class ExprParser {
public:
  explicit ExprParser(std::string_view text) : text_(text) { lex(); }

  GeneralAxiom parseAxiom() {
    GeneralAxiom ax;
    if (isRole(peek()) && (peek(1) == "<" || peek(1) == "*")) {
      ax.kind = GeneralAxiom::Kind::RoleInclusion;
      ax.chain.push_back(roleIndex(next()));
      while (peek() == "*") {
        next();
        ax.chain.push_back(roleIndex(next()));
      }
      expect("<");
      ax.superRole = roleIndex(next());
    } else {
      ax.lhs = parseConj();
      const auto op = next();
      if (op == "<")
        ax.kind = GeneralAxiom::Kind::Subsumption;
      else if (op == "=")
        ax.kind = GeneralAxiom::Kind::Equivalence;
      else
        fail("expected '<' or '='");
      ax.rhs = parseConj();
    }
    if (pos_ != toks_.size()) fail("trailing input '" + toks_[pos_] + "'");
    return ax;
  }

private:
  ConceptExpr parseConj() {
    std::vector<ConceptExpr> parts{parseAtom()};
    while (peek() == "&") {
      next();
      parts.push_back(parseAtom());
    }
    if (parts.size() == 1) return std::move(parts.front());
    return ConceptExpr::conj(std::move(parts));
  }

  ConceptExpr parseAtom() {
    const auto tok = next();
    if (tok == "(") {
      auto e = parseConj();
      expect(")");
      return e;
    }
    if (tok == "Top") return {ConceptExpr::Kind::Top, 0, {}};
    if (tok == "Bottom") return {ConceptExpr::Kind::Bottom, 0, {}};
    if (isConcept(tok)) return ConceptExpr::name(index(tok));
    if (isRole(tok)) {
      const auto r = index(tok);
      expect(".");
      if (peek() == "Self") {
        next();
        return {ConceptExpr::Kind::Self, r, {}};
      }
      return ConceptExpr::exists(r, parseAtom());
    }
    fail("unexpected token '" + tok + "'");
  }

  void lex() {
    std::size_t i = 0;
    while (i < text_.size()) {
      const auto ch = static_cast<unsigned char>(text_[i]);
      if (std::isspace(ch)) {
        ++i;
      } else if (std::isalpha(ch)) {
        std::size_t j = i + 1;
        while (j < text_.size() && std::isalnum(static_cast<unsigned char>(text_[j]))) ++j;
        toks_.emplace_back(text_.substr(i, j - i));
        i = j;
      } else {
        toks_.emplace_back(1, text_[i]);
        ++i;
      }
    }
  }

  static std::optional<std::uint32_t> numberAfter(const std::string& tok, char prefix) {
    if (tok.size() < 2 || tok[0] != prefix) return std::nullopt;
    std::uint32_t v = 0;
    auto [p, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size()) return std::nullopt;
    return v;
  }
  static bool isConcept(const std::string& t) { return numberAfter(t, 'C').has_value(); }
  static bool isRole(const std::string& t) { return numberAfter(t, 'R').has_value(); }
  static std::uint32_t index(const std::string& t) { return *numberAfter(t, t[0]); }
  std::uint32_t roleIndex(const std::string& t) {
    if (!isRole(t)) fail("expected a role name, got '" + t + "'");
    return index(t);
  }

  std::string peek(std::size_t ahead = 0) const {
    return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : std::string{};
  }
  std::string next() {
    if (pos_ >= toks_.size()) fail("unexpected end of axiom");
    return toks_[pos_++];
  }
  void expect(const std::string& t) {
    if (next() != t) fail("expected '" + t + "'");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(0, msg + " in '" + std::string(text_) + "'");
  }

  std::string_view text_;
  std::vector<std::string> toks_;
  std::size_t pos_ = 0;
};

// Returns a reason when the expression leaves EL+ or the input signature.
std::optional<std::string> checkExpr(const ConceptExpr& e, const Signature& sig) {
  switch (e.kind) {
    case ConceptExpr::Kind::Top:
      return "Top is not supported";
    case ConceptExpr::Kind::Bottom:
      return "Bottom is not supported";
    case ConceptExpr::Kind::Self:
      return "self restriction is outside EL+";
    case ConceptExpr::Kind::Name:
      if (!sig.contains({NameKind::Concept, e.index})) return "concept index out of signature";
      return std::nullopt;
    case ConceptExpr::Kind::Exists:
      if (!sig.contains({NameKind::Role, e.index})) return "role index out of signature";
      return checkExpr(e.children.front(), sig);
    case ConceptExpr::Kind::And:
      for (const auto& c : e.children)
        if (auto why = checkExpr(c, sig)) return why;
      return std::nullopt;
  }
  return std::nullopt;
}

void flattenConj(const ConceptExpr& e, std::vector<const ConceptExpr*>& out) {
  if (e.kind == ConceptExpr::Kind::And) {
    for (const auto& c : e.children) flattenConj(c, out);
  } else {
    out.push_back(&e);
  }
}

}  // namespace

std::string GeneralAxiom::render() const {
  if (kind == Kind::RoleInclusion) {
    std::string s;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      if (i) s += " * ";
      s += "R" + std::to_string(chain[i]);
    }
    return s + " < R" + std::to_string(superRole);
  }
  return renderExpr(lhs, false) + (kind == Kind::Equivalence ? " = " : " < ") + renderExpr(rhs, false);
}

GeneralAxiom parseGeneralAxiom(std::string_view text) { return ExprParser(text).parseAxiom(); }

GeneralAxiom toGeneral(const Axiom& a) {
  GeneralAxiom g;
  const auto c = [&](std::size_t i) { return ConceptExpr::name(a.arg(i)); };
  switch (a.form()) {
    case Form::Sub:
      g.lhs = c(0);
      g.rhs = c(1);
      break;
    case Form::SubConj:
      g.lhs = ConceptExpr::conj({c(0), c(1)});
      g.rhs = c(2);
      break;
    case Form::SubEx:
      g.lhs = c(0);
      g.rhs = ConceptExpr::exists(a.arg(1), c(2));
      break;
    case Form::ExSub:
      g.lhs = ConceptExpr::exists(a.arg(0), c(1));
      g.rhs = c(2);
      break;
    case Form::RoleSub:
      g.kind = GeneralAxiom::Kind::RoleInclusion;
      g.chain = {a.arg(0)};
      g.superRole = a.arg(1);
      break;
    case Form::RoleChain:
      g.kind = GeneralAxiom::Kind::RoleInclusion;
      g.chain = {a.arg(0), a.arg(1)};
      g.superRole = a.arg(2);
      break;
  }
  return g;
}

void Normalizer::add(const GeneralAxiom& ax) {
  if (ax.kind == GeneralAxiom::Kind::RoleInclusion) {
    if (ax.chain.empty()) throw NormalizeError(ax.render(), "empty role chain");
    for (auto r : ax.chain)
      if (!input_.contains({NameKind::Role, r})) throw NormalizeError(ax.render(), "role index out of signature");
    if (!input_.contains({NameKind::Role, ax.superRole}))
      throw NormalizeError(ax.render(), "role index out of signature");

    auto chain = ax.chain;
    while (chain.size() > 2) {
      const auto u = freshRole();
      emit(Axiom::roleChain(Role{chain[0]}, Role{chain[1]}, Role{u}));
      chain.erase(chain.begin());
      chain.front() = u;
    }
    if (chain.size() == 1)
      emit(Axiom::roleSub(Role{chain[0]}, Role{ax.superRole}));
    else
      emit(Axiom::roleChain(Role{chain[0]}, Role{chain[1]}, Role{ax.superRole}));
    return;
  }

  for (const auto* e : {&ax.lhs, &ax.rhs})
    if (auto why = checkExpr(*e, input_)) throw NormalizeError(ax.render(), *why);

  sub(ax.lhs, ax.rhs);
  if (ax.kind == GeneralAxiom::Kind::Equivalence) sub(ax.rhs, ax.lhs);
}

void Normalizer::sub(const ConceptExpr& lhs, const ConceptExpr& rhs) {
  using K = ConceptExpr::Kind;
  if (rhs.kind == K::And) {
    for (const auto& part : rhs.children) sub(lhs, part);
    return;
  }
  if (lhs.kind == K::Name) {
    if (rhs.kind == K::Name) {
      emit(Axiom::sub(Concept{lhs.index}, Concept{rhs.index}));
      return;
    }
    // rhs is an existential
    const auto& filler = rhs.children.front();
    if (filler.kind == K::Name) {
      emit(Axiom::subEx(Concept{lhs.index}, Role{rhs.index}, Concept{filler.index}));
    } else {
      const auto x = freshConcept();
      emit(Axiom::subEx(Concept{lhs.index}, Role{rhs.index}, Concept{x}));
      sub(ConceptExpr::name(x), filler);
    }
    return;
  }
  if (rhs.kind != K::Name) {
    const auto x = freshConcept();
    sub(lhs, ConceptExpr::name(x));
    sub(ConceptExpr::name(x), rhs);
    return;
  }
  if (lhs.kind == K::Exists) {
    const auto& filler = lhs.children.front();
    if (filler.kind == K::Name) {
      emit(Axiom::exSub(Role{lhs.index}, Concept{filler.index}, Concept{rhs.index}));
    } else {
      const auto x = freshConcept();
      emit(Axiom::exSub(Role{lhs.index}, Concept{x}, Concept{rhs.index}));
      sub(filler, ConceptExpr::name(x));
    }
    return;
  }
  // Conjunction on the left, concept name on the right.
  std::vector<const ConceptExpr*> parts;
  flattenConj(lhs, parts);
  std::vector<std::uint32_t> names;
  std::vector<std::pair<const ConceptExpr*, std::uint32_t>> deferred;
  for (const auto* p : parts) {
    if (p->kind == K::Name) {
      names.push_back(p->index);
    } else {
      const auto x = freshConcept();
      names.push_back(x);
      deferred.emplace_back(p, x);
    }
  }
  conjunctionSub(std::move(names), rhs.index);
  for (const auto& [expr, x] : deferred) sub(*expr, ConceptExpr::name(x));
}

void Normalizer::conjunctionSub(std::vector<std::uint32_t> names, std::uint32_t rhs) {
  if (names.size() == 1) {
    emit(Axiom::sub(Concept{names[0]}, Concept{rhs}));
    return;
  }
  while (names.size() > 2) {
    const auto x = freshConcept();
    emit(Axiom::subConj(Concept{names[0]}, Concept{names[1]}, Concept{x}));
    names.erase(names.begin());
    names.front() = x;
  }
  emit(Axiom::subConj(Concept{names[0]}, Concept{names[1]}, Concept{rhs}));
}

void Normalizer::emit(const Axiom& a) {
  if (seen_.insert(a).second) out_.push_back(a);
}

Normalized normalize(std::span<const GeneralAxiom> axioms, Signature sig) {
  Normalizer n(sig);
  for (const auto& a : axioms) n.add(a);
  return {n.axioms(), n.signature()};
}

}  // namespace elnn
