#pragma once
// Independent reference implementations the tests compare the library against.
// Nothing here calls into the code under test except the plain data types.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "elnn/kb.hpp"

namespace oracle {

using elnn::Axiom;
using elnn::Concept;
using elnn::Role;

// Generate-and-test saturation: every candidate Sub / SubEx over the signature
// is checked against every rule by search over the known set, in Jacobi rounds,
// so round t holds exactly what one rule application adds to rounds < t.
class Saturation {
public:
  explicit Saturation(const elnn::KnowledgeBase& kb) : sig_(kb.signature()) {
    for (const auto& a : kb.axioms()) known_.insert(a);
    original_ = known_;
    run();
  }

  const std::vector<std::set<Axiom>>& rounds() const { return rounds_; }

  std::set<Axiom> conclusions() const {
    std::set<Axiom> out;
    for (const auto& r : rounds_) out.insert(r.begin(), r.end());
    return out;
  }

private:
  bool sub(std::uint32_t a, std::uint32_t b) const {
    return a == b || known_.count(Axiom::sub(Concept{a}, Concept{b}));
  }
  bool has(const Axiom& a) const { return known_.count(a) > 0; }

  bool derivable(const Axiom& x) const {
    const std::uint32_t nc = sig_.maxConcepts, nr = sig_.maxRoles;
    if (x.form() == elnn::Form::Sub) {
      const auto a = x.arg(0), c = x.arg(1);
      for (std::uint32_t b = 1; b <= nc; ++b)
        if (b != a && b != c && sub(a, b) && sub(b, c)) return true;  // 1
      for (std::uint32_t b1 = 1; b1 <= nc; ++b1) {
        if (!sub(a, b1)) continue;
        for (std::uint32_t b2 = 1; b2 <= nc; ++b2)
          if (sub(a, b2) && has(Axiom::subConj(Concept{b1}, Concept{b2}, Concept{c}))) return true;  // 2
      }
      for (std::uint32_t r = 1; r <= nr; ++r)
        for (std::uint32_t b = 1; b <= nc; ++b) {
          if (!has(Axiom::subEx(Concept{a}, Role{r}, Concept{b}))) continue;
          for (std::uint32_t cc = 1; cc <= nc; ++cc)
            if (sub(b, cc) && has(Axiom::exSub(Role{r}, Concept{cc}, Concept{c}))) return true;  // 4
        }
      return false;
    }
    const auto a = x.arg(0), s = x.arg(1), c = x.arg(2);
    for (std::uint32_t b = 1; b <= nc; ++b)
      if (b != a && sub(a, b) && has(Axiom::subEx(Concept{b}, Role{s}, Concept{c}))) return true;  // 3
    for (std::uint32_t r = 1; r <= nr; ++r)
      if (has(Axiom::subEx(Concept{a}, Role{r}, Concept{c})) && has(Axiom::roleSub(Role{r}, Role{s})))
        return true;  // 5
    for (std::uint32_t r1 = 1; r1 <= nr; ++r1)
      for (std::uint32_t b = 1; b <= nc; ++b) {
        if (!has(Axiom::subEx(Concept{a}, Role{r1}, Concept{b}))) continue;
        for (std::uint32_t r2 = 1; r2 <= nr; ++r2)
          if (has(Axiom::subEx(Concept{b}, Role{r2}, Concept{c})) &&
              has(Axiom::roleChain(Role{r1}, Role{r2}, Role{s})))
            return true;  // 6
      }
    return false;
  }

  void run() {
    for (;;) {
      std::set<Axiom> fresh;
      for (std::uint32_t a = 1; a <= sig_.maxConcepts; ++a)
        for (std::uint32_t c = 1; c <= sig_.maxConcepts; ++c) {
          if (a != c) {
            const auto x = Axiom::sub(Concept{a}, Concept{c});
            if (!has(x) && derivable(x)) fresh.insert(x);
          }
          for (std::uint32_t r = 1; r <= sig_.maxRoles; ++r) {
            const auto x = Axiom::subEx(Concept{a}, Role{r}, Concept{c});
            if (!has(x) && derivable(x)) fresh.insert(x);
          }
        }
      if (fresh.empty()) return;
      known_.insert(fresh.begin(), fresh.end());
      rounds_.push_back(std::move(fresh));
    }
  }

  elnn::Signature sig_;
  std::set<Axiom> known_, original_;
  std::vector<std::set<Axiom>> rounds_;
};

inline std::set<Axiom> saturate(const elnn::KnowledgeBase& kb) { return Saturation(kb).conclusions(); }

// Textbook full-matrix Levenshtein.
inline std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
  return d[a.size()][b.size()];
}

// Any axiom of a uniformly drawn form with uniformly drawn names.
inline Axiom randomAxiom(std::mt19937_64& rng, const elnn::Signature& sig) {
  std::uniform_int_distribution<int> form(0, 5);
  std::uniform_int_distribution<std::uint32_t> c(1, sig.maxConcepts), r(1, sig.maxRoles);
  switch (form(rng)) {
    case 0: return Axiom::sub(Concept{c(rng)}, Concept{c(rng)});
    case 1: return Axiom::subConj(Concept{c(rng)}, Concept{c(rng)}, Concept{c(rng)});
    case 2: return Axiom::subEx(Concept{c(rng)}, Role{r(rng)}, Concept{c(rng)});
    case 3: return Axiom::exSub(Role{r(rng)}, Concept{c(rng)}, Concept{c(rng)});
    case 4: return Axiom::roleSub(Role{r(rng)}, Role{r(rng)});
    default: return Axiom::roleChain(Role{r(rng)}, Role{r(rng)}, Role{r(rng)});
  }
}

// Random KB over a small signature with a bias towards Sub / SubEx so that
// chains actually form; reflexive Sub axioms are skipped.
inline elnn::KnowledgeBase randomKB(std::uint64_t seed, std::size_t maxAxioms = 30, std::uint32_t maxC = 20,
                                    std::uint32_t maxR = 5) {
  std::mt19937_64 rng(seed);
  const elnn::Signature sig{std::uniform_int_distribution<std::uint32_t>(3, maxC)(rng),
                            std::uniform_int_distribution<std::uint32_t>(1, maxR)(rng)};
  const auto n = std::uniform_int_distribution<std::size_t>(1, maxAxioms)(rng);
  elnn::KnowledgeBase kb(sig);
  std::bernoulli_distribution chainy(0.5);
  std::uniform_int_distribution<std::uint32_t> c(1, sig.maxConcepts), r(1, sig.maxRoles);
  for (std::size_t tries = 0; kb.size() < n && tries < 50 * n; ++tries) {
    Axiom a = chainy(rng) ? (chainy(rng) ? Axiom::sub(Concept{c(rng)}, Concept{c(rng)})
                                         : Axiom::subEx(Concept{c(rng)}, Role{r(rng)}, Concept{c(rng)}))
                          : randomAxiom(rng, sig);
    if (a.isReflexive()) continue;
    kb.add(a);
  }
  return kb;
}

}  // namespace oracle
