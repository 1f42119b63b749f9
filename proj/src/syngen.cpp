#include "elnn/syngen.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

namespace elnn {

GenConfig GenConfig::moderate(std::uint64_t seed, std::uint32_t iterations) {
  GenConfig cfg;
  cfg.iterations = iterations;
  cfg.randomAxioms = 2 * structuredCount(iterations);
  cfg.seed = seed;
  return cfg;
}

namespace {

class Builder {
public:
  Builder(const GenConfig& cfg, Signature sig) : cfg_(cfg), kb_(sig), rng_(cfg.seed) {}

  void structured() {
    // Names of the gadget that feeds repetition t: seed S < G, S < V, S < T.H.
    const Concept seed = freshConcept();
    Concept g = freshConcept(), v = freshConcept(), h = freshConcept();
    Role t = role();
    add(Axiom::sub(seed, g));
    add(Axiom::sub(seed, v));
    add(Axiom::subEx(seed, t, h));

    for (std::uint32_t it = 0; it < cfg_.iterations; ++it) {
      const Concept u1 = freshConcept(), v1 = freshConcept(), w1 = freshConcept(), f1 = freshConcept(), g1 = freshConcept(), h1 = freshConcept();
      const Role r1 = role(), q1 = role(), r2 = role(), t1 = role();
      add(Axiom::sub(g, u1));                  // rule 1: S < U
      add(Axiom::subConj(g, v, v1));           // rule 2: S < V'
      add(Axiom::subEx(g, r1, w1));            // rule 3: S < R.W
      add(Axiom::sub(h, f1));                  // rule 4: S < G' via T.H, H < F, T.F < G'
      add(Axiom::exSub(t, f1, g1));
      add(Axiom::roleSub(t, q1));              // rule 5: S < Q.H
      add(Axiom::subEx(h, r2, h1));            // rule 6: S < T'.H' via T.H, H < R2.H', T*R2 < T'
      add(Axiom::roleChain(t, r2, t1));
      g = g1;
      v = v1;
      h = h1;
      t = t1;
    }
    seed_ = seed;
  }

  void random() {
    // Pool: the seed concept plus names past the structured block.
    std::vector<std::uint32_t> poolC{seed_.index};
    for (std::uint32_t i = 0; i < cfg_.randomConcepts; ++i) poolC.push_back(freshConcept().index);
    std::vector<std::uint32_t> poolR;
    for (std::uint32_t i = 0; i < cfg_.randomRoles; ++i) poolR.push_back(role().index);

    std::vector<std::uint32_t> usedC{seed_.index}, usedR;
    std::set<std::uint32_t> usedCSet{seed_.index}, usedRSet;
    std::uniform_int_distribution<std::size_t> pickForm(0, kAllForms.size() - 1);

    const std::size_t maxAttempts = 1000 * (static_cast<std::size_t>(cfg_.randomAxioms) + 1);
    std::size_t attempts = 0;
    std::uint32_t added = 0;
    while (added < cfg_.randomAxioms) {
      if (++attempts > maxAttempts)
        throw ConfigError("random name pool too small for " + std::to_string(cfg_.randomAxioms) +
                          " distinct random axioms");
      const Form f = kAllForms[pickForm(rng_)];
      const auto n = arity(f);
      if (poolR.empty() && f != Form::Sub && f != Form::SubConj) continue;

      // Anchor one slot on a name already in the random component.
      std::vector<std::size_t> anchorable;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& used = slotKind(f, i) == NameKind::Concept ? usedC : usedR;
        if (!used.empty()) anchorable.push_back(i);
      }
      if (anchorable.empty()) continue;
      const auto anchor = anchorable[std::uniform_int_distribution<std::size_t>(0, anchorable.size() - 1)(rng_)];

      std::array<std::uint32_t, 3> idx{};
      for (std::size_t i = 0; i < n; ++i) {
        const bool isConcept = slotKind(f, i) == NameKind::Concept;
        const auto& from = i == anchor ? (isConcept ? usedC : usedR) : (isConcept ? poolC : poolR);
        idx[i] = from[std::uniform_int_distribution<std::size_t>(0, from.size() - 1)(rng_)];
      }
      const auto ax = Axiom::fromIndices(f, std::span(idx.data(), n));
      if ((f == Form::Sub || f == Form::RoleSub) && idx[0] == idx[1]) continue;
      if (!kb_.add(ax)) continue;
      ++added;
      for (std::size_t i = 0; i < n; ++i) {
        if (slotKind(f, i) == NameKind::Concept) {
          if (usedCSet.insert(idx[i]).second) usedC.push_back(idx[i]);
        } else if (usedRSet.insert(idx[i]).second) {
          usedR.push_back(idx[i]);
        }
      }
    }
  }

  KnowledgeBase finish() {
    if (!cfg_.shuffleNames) return std::move(kb_);
    const auto renamed = anonymize(kb_, rng_());
    auto axioms = renamed.kb.axioms();
    std::shuffle(axioms.begin(), axioms.end(), rng_);
    return KnowledgeBase(kb_.signature(), std::move(axioms));
  }

private:
  Concept freshConcept() { return Concept{++nextConcept_}; }
  Role role() { return Role{++nextRole_}; }
  void add(const Axiom& a) { kb_.add(a); }

  const GenConfig& cfg_;
  KnowledgeBase kb_;
  std::mt19937_64 rng_;
  std::uint32_t nextConcept_ = 0;
  std::uint32_t nextRole_ = 0;
  Concept seed_;
};

}  // namespace

KnowledgeBase generate(const GenConfig& cfg) {
  if (cfg.iterations == 0) throw ConfigError("iterations must be positive");
  const std::uint32_t needC = structuredConcepts(cfg.iterations) + cfg.randomConcepts;
  const std::uint32_t needR = structuredRoles(cfg.iterations) + cfg.randomRoles;
  if (cfg.randomAxioms > 0 && cfg.randomConcepts == 0)
    throw ConfigError("random axioms requested with an empty random concept pool");
  Signature sig{cfg.maxConcepts ? cfg.maxConcepts : needC, cfg.maxRoles ? cfg.maxRoles : needR};
  if (sig.maxConcepts < needC || sig.maxRoles < needR)
    throw ConfigError("signature (" + std::to_string(sig.maxConcepts) + ", " + std::to_string(sig.maxRoles) +
                      ") too small: " + std::to_string(cfg.iterations) + " iterations and the random pool need (" +
                      std::to_string(needC) + ", " + std::to_string(needR) + ")");

  Builder b(cfg, sig);
  b.structured();
  b.random();
  return b.finish();
}

std::vector<KnowledgeBase> generateBatch(const GenConfig& cfg, std::size_t count) {
  std::vector<KnowledgeBase> out(count);
  const auto n = static_cast<long>(count);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      auto c = cfg;
      c.seed = cfg.seed + static_cast<std::uint64_t>(i);
      out[i] = generate(c);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace elnn
