#include "elnn/kb.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace elnn {

NameKind slotKind(Form f, std::size_t pos) {
  switch (f) {
    case Form::Sub:
    case Form::SubConj:
      return NameKind::Concept;
    case Form::SubEx:
      return pos == 1 ? NameKind::Role : NameKind::Concept;
    case Form::ExSub:
      return pos == 0 ? NameKind::Role : NameKind::Concept;
    case Form::RoleSub:
    case Form::RoleChain:
      return NameKind::Role;
  }
  return NameKind::Concept;
}

Axiom Axiom::fromIndices(Form f, std::span<const std::uint32_t> idx) {
  if (idx.size() != elnn::arity(f)) throw Error("Axiom::fromIndices: wrong number of names");
  return {f, idx[0], idx[1], idx.size() > 2 ? idx[2] : 0u};
}

std::vector<Name> Axiom::names() const {
  std::vector<Name> out;
  out.reserve(arity());
  for (std::size_t i = 0; i < arity(); ++i) out.push_back(name(i));
  return out;
}

bool Axiom::validIn(const Signature& sig) const {
  for (std::size_t i = 0; i < arity(); ++i)
    if (!sig.contains(name(i))) return false;
  return true;
}

std::string renderName(Name n) {
  return (n.kind == NameKind::Concept ? "C" : "R") + std::to_string(n.index);
}

std::string renderAxiom(const Axiom& a) {
  const auto n = [&](std::size_t i) { return renderName(a.name(i)); };
  switch (a.form()) {
    case Form::Sub:
      return n(0) + " < " + n(1);
    case Form::SubConj:
      return n(0) + " & " + n(1) + " < " + n(2);
    case Form::SubEx:
      return n(0) + " < " + n(1) + " . " + n(2);
    case Form::ExSub:
      return n(0) + " . " + n(1) + " < " + n(2);
    case Form::RoleSub:
      return n(0) + " < " + n(1);
    case Form::RoleChain:
      return n(0) + " * " + n(1) + " < " + n(2);
  }
  return {};
}

namespace {

// Splits into names (C12, R3) and single-character operators.
std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char ch = s[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(ch))) {
      std::size_t j = i + 1;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.emplace_back(s.substr(i, j - i));
      i = j;
    } else {
      out.emplace_back(1, ch);
      ++i;
    }
  }
  return out;
}

std::optional<Name> asName(const std::string& tok) {
  if (tok.size() < 2 || (tok[0] != 'C' && tok[0] != 'R')) return std::nullopt;
  std::uint32_t idx = 0;
  auto [p, ec] = std::from_chars(tok.data() + 1, tok.data() + tok.size(), idx);
  if (ec != std::errc{} || p != tok.data() + tok.size()) return std::nullopt;
  return Name{tok[0] == 'C' ? NameKind::Concept : NameKind::Role, idx};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Axiom parseAxiom(std::string_view text) {
  const auto toks = tokenize(text);
  // Pattern letters: C concept, R role, anything else must match literally.
  struct Pattern {
    const char* shape;
    Form form;
  };
  static constexpr Pattern patterns[] = {
      {"C<C", Form::Sub},       {"C&C<C", Form::SubConj}, {"C<R.C", Form::SubEx},
      {"R.C<C", Form::ExSub},   {"R<R", Form::RoleSub},   {"R*R<R", Form::RoleChain},
  };
  for (const auto& p : patterns) {
    const std::string_view shape(p.shape);
    if (shape.size() != toks.size()) continue;
    std::vector<std::uint32_t> idx;
    bool ok = true;
    for (std::size_t i = 0; i < shape.size() && ok; ++i) {
      if (shape[i] == 'C' || shape[i] == 'R') {
        auto n = asName(toks[i]);
        const auto want = shape[i] == 'C' ? NameKind::Concept : NameKind::Role;
        if (!n || n->kind != want) {
          ok = false;
        } else {
          idx.push_back(n->index);
        }
      } else {
        ok = toks[i].size() == 1 && toks[i][0] == shape[i];
      }
    }
    if (ok) return Axiom::fromIndices(p.form, idx);
  }
  throw ParseError(0, "not a normal-form axiom: '" + std::string(text) + "'");
}

KnowledgeBase::KnowledgeBase(Signature sig, std::vector<Axiom> axioms) : sig_(sig) {
  axioms_.reserve(axioms.size());
  for (const auto& a : axioms) add(a);
}

std::optional<std::size_t> KnowledgeBase::indexOf(const Axiom& a) const {
  if (auto it = index_.find(a); it != index_.end()) return it->second;
  return std::nullopt;
}

bool KnowledgeBase::add(const Axiom& a) {
  if (!a.validIn(sig_)) throw Error("axiom '" + renderAxiom(a) + "' is outside the signature");
  auto [it, inserted] = index_.emplace(a, axioms_.size());
  if (!inserted) return false;
  axioms_.push_back(a);
  return true;
}

ParseResult parseKBWithWarnings(std::string_view text) {
  ParseResult res;
  std::optional<Signature> sig;
  std::size_t lineNo = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineNo;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (!sig) {
      std::istringstream in{std::string(line)};
      std::string kw;
      long long c = 0, r = 0;
      std::string rest;
      if (!(in >> kw >> c >> r) || kw != "sig" || (in >> rest))
        throw ParseError(lineNo, "expected header 'sig <maxConcepts> <maxRoles>'");
      if (c < 1 || r < 1) throw ParseError(lineNo, "signature bounds must be positive");
      sig = Signature{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(r)};
      res.kb = KnowledgeBase(*sig);
      continue;
    }

    Axiom a;
    try {
      a = parseAxiom(line);
    } catch (const ParseError& e) {
      throw ParseError(lineNo, e.what());
    }
    for (const auto& n : a.names()) {
      if (!sig->contains(n))
        throw ParseError(lineNo, "name " + renderName(n) + " outside signature (index 0 or above bound)");
    }
    if (!res.kb.add(a))
      res.warnings.push_back("line " + std::to_string(lineNo) + ": duplicate axiom '" + renderAxiom(a) +
                             "' dropped");
  }
  if (!sig) throw ParseError(0, "missing 'sig' header");
  return res;
}

KnowledgeBase parseKB(std::string_view text) { return parseKBWithWarnings(text).kb; }

std::string renderKB(const KnowledgeBase& kb) {
  std::string out = "sig " + std::to_string(kb.signature().maxConcepts) + " " +
                    std::to_string(kb.signature().maxRoles) + "\n";
  for (const auto& a : kb.axioms()) {
    out += renderAxiom(a);
    out += '\n';
  }
  return out;
}

KnowledgeBase readKBFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open KB file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parseKB(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.what());
  }
}

void writeKBFile(const std::string& path, const KnowledgeBase& kb) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write KB file '" + path + "'");
  out << renderKB(kb);
}

Name Renaming::apply(Name n) const {
  const auto& table = n.kind == NameKind::Concept ? concepts : roles;
  if (n.index == 0 || n.index > table.size()) throw Error("renaming: name " + renderName(n) + " not covered");
  return {n.kind, table[n.index - 1]};
}

Axiom Renaming::apply(const Axiom& a) const {
  std::array<std::uint32_t, 3> idx{};
  for (std::size_t i = 0; i < a.arity(); ++i) idx[i] = apply(a.name(i)).index;
  return Axiom::fromIndices(a.form(), std::span(idx.data(), a.arity()));
}

Renaming Renaming::inverse() const {
  Renaming inv;
  inv.concepts.resize(concepts.size());
  inv.roles.resize(roles.size());
  for (std::size_t i = 0; i < concepts.size(); ++i) inv.concepts[concepts[i] - 1] = static_cast<std::uint32_t>(i + 1);
  for (std::size_t i = 0; i < roles.size(); ++i) inv.roles[roles[i] - 1] = static_cast<std::uint32_t>(i + 1);
  inv.labels = labels;
  return inv;
}

KnowledgeBase rename(const KnowledgeBase& kb, const Renaming& r) {
  KnowledgeBase out(kb.signature());
  for (const auto& a : kb.axioms()) out.add(r.apply(a));
  return out;
}

Anonymized anonymize(const KnowledgeBase& kb, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Renaming r;
  r.concepts.resize(kb.signature().maxConcepts);
  r.roles.resize(kb.signature().maxRoles);
  std::iota(r.concepts.begin(), r.concepts.end(), 1u);
  std::iota(r.roles.begin(), r.roles.end(), 1u);
  std::shuffle(r.concepts.begin(), r.concepts.end(), rng);
  std::shuffle(r.roles.begin(), r.roles.end(), rng);
  r.labels = kb.labels();
  return {rename(kb, r), std::move(r)};
}

std::vector<Name> usedNames(std::span<const Axiom> axioms) {
  std::set<Name> seen;
  for (const auto& a : axioms)
    for (std::size_t i = 0; i < a.arity(); ++i) seen.insert(a.name(i));
  return {seen.begin(), seen.end()};
}

bool isConnected(std::span<const Axiom> axioms) {
  if (axioms.size() <= 1) return true;
  // Union-find over axioms; names link every axiom that mentions them.
  std::vector<std::size_t> parent(axioms.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<Name, std::size_t> owner;
  for (std::size_t i = 0; i < axioms.size(); ++i) {
    for (const auto& n : axioms[i].names()) {
      auto [it, inserted] = owner.emplace(n, i);
      if (!inserted) parent[find(i)] = find(it->second);
    }
  }
  const auto root = find(0);
  for (std::size_t i = 1; i < axioms.size(); ++i)
    if (find(i) != root) return false;
  return true;
}

}  // namespace elnn
