#include "elnn/reasoner.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace elnn {

namespace {

using Index = std::uint32_t;

struct PairHash {
  std::size_t operator()(const std::pair<Index, Index>& p) const noexcept {
    return (static_cast<std::size_t>(p.first) << 32) ^ p.second;
  }
};

// Rule-then-premise order decides which derivation of a conclusion is kept.
bool precedes(const Derivation& a, const Derivation& b) {
  if (a.rule != b.rule) return a.rule < b.rule;
  const auto n = std::min(a.premises.size(), b.premises.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a.premises[i] == b.premises[i]) continue;
    return renderAxiom(a.premises[i]) < renderAxiom(b.premises[i]);
  }
  return a.premises.size() < b.premises.size();
}

class Saturator {
public:
  explicit Saturator(const KnowledgeBase& kb) : kb_(kb) {
    const auto nc = kb.signature().maxConcepts + 1;
    supers_.resize(nc);
    exists_.resize(nc);
    for (const auto& a : kb.axioms()) {
      switch (a.form()) {
        case Form::Sub:
        case Form::SubEx:
          learn(a);
          break;
        case Form::SubConj:
          conj_.push_back(a);
          if (a.arg(0) == a.arg(1)) selfConj_.insert(a.arg(0));
          break;
        case Form::ExSub:
          exSub_[{a.arg(0), a.arg(1)}].push_back(a.arg(2));
          break;
        case Form::RoleSub:
          roleSub_[a.arg(0)].push_back(a.arg(1));
          break;
        case Form::RoleChain:
          chain_[{a.arg(0), a.arg(1)}].push_back(a.arg(2));
          break;
      }
    }
  }

  std::vector<Derivation> step() {
    candidates_.clear();
    const auto nc = kb_.signature().maxConcepts;
    for (Index a = 1; a <= nc; ++a) {
      // A & A < C fires on the reflexive premise alone.
      if (supers_[a].empty() && exists_[a].empty() && !selfConj_.contains(a)) continue;
      matchFrom(a);
    }
    std::vector<Derivation> out;
    out.reserve(candidates_.size());
    for (auto& [ax, d] : candidates_) out.push_back(std::move(d));
    std::sort(out.begin(), out.end(), [](const Derivation& x, const Derivation& y) {
      return renderAxiom(x.conclusion) < renderAxiom(y.conclusion);
    });
    for (const auto& d : out) learn(d.conclusion);
    return out;
  }

private:
  static Axiom sub(Index a, Index b) { return Axiom::sub(Concept{a}, Concept{b}); }
  static Axiom subEx(Index a, Index r, Index b) { return Axiom::subEx(Concept{a}, Role{r}, Concept{b}); }

  bool below(Index a, Index b) const { return a == b || known_.contains(sub(a, b)); }

  void learn(const Axiom& a) {
    if (a.isReflexive() || !known_.insert(a).second) return;
    if (a.form() == Form::Sub)
      supers_[a.arg(0)].push_back(a.arg(1));
    else
      exists_[a.arg(0)].push_back({a.arg(1), a.arg(2)});
  }

  void offer(Axiom conclusion, RuleId rule, std::vector<Axiom> premises) {
    if (conclusion.isReflexive() || known_.contains(conclusion)) return;
    Derivation d{conclusion, rule, std::move(premises)};
    auto [it, inserted] = candidates_.try_emplace(conclusion, d);
    if (!inserted && precedes(d, it->second)) it->second = std::move(d);
  }

  void matchFrom(Index a) {
    const auto& sup = supers_[a];
    const auto& ex = exists_[a];

    for (Index b : sup)
      for (Index c : supers_[b]) offer(sub(a, c), 1, {sub(a, b), sub(b, c)});

    for (const auto& cj : conj_) {
      const Index b1 = cj.arg(0), b2 = cj.arg(1);
      if (!below(a, b1) || !below(a, b2)) continue;
      std::vector<Axiom> prem;
      if (b1 != a) prem.push_back(sub(a, b1));
      if (b2 != a && b2 != b1) prem.push_back(sub(a, b2));
      prem.push_back(cj);
      offer(sub(a, cj.arg(2)), 2, std::move(prem));
    }

    for (Index b : sup)
      for (const auto& [r, c] : exists_[b]) offer(subEx(a, r, c), 3, {sub(a, b), subEx(b, r, c)});

    for (const auto& [r, b] : ex) {
      const auto tryFiller = [&](Index c) {
        auto it = exSub_.find({r, c});
        if (it == exSub_.end()) return;
        for (Index d : it->second) {
          std::vector<Axiom> prem{subEx(a, r, b)};
          if (c != b) prem.push_back(sub(b, c));
          prem.push_back(Axiom::exSub(Role{r}, Concept{c}, Concept{d}));
          offer(sub(a, d), 4, std::move(prem));
        }
      };
      tryFiller(b);
      for (Index c : supers_[b]) tryFiller(c);
    }

    for (const auto& [r, b] : ex) {
      auto it = roleSub_.find(r);
      if (it == roleSub_.end()) continue;
      for (Index s : it->second) offer(subEx(a, s, b), 5, {subEx(a, r, b), Axiom::roleSub(Role{r}, Role{s})});
    }

    for (const auto& [r1, b] : ex) {
      for (const auto& [r2, c] : exists_[b]) {
        auto it = chain_.find({r1, r2});
        if (it == chain_.end()) continue;
        for (Index s : it->second)
          offer(subEx(a, s, c), 6,
                {subEx(a, r1, b), subEx(b, r2, c), Axiom::roleChain(Role{r1}, Role{r2}, Role{s})});
      }
    }
  }

  const KnowledgeBase& kb_;
  std::unordered_set<Axiom, AxiomHash> known_;
  std::vector<std::vector<Index>> supers_;
  std::vector<std::vector<std::pair<Index, Index>>> exists_;
  std::vector<Axiom> conj_;
  std::unordered_set<Index> selfConj_;
  std::unordered_map<std::pair<Index, Index>, std::vector<Index>, PairHash> exSub_;
  std::unordered_map<Index, std::vector<Index>> roleSub_;
  std::unordered_map<std::pair<Index, Index>, std::vector<Index>, PairHash> chain_;
  std::unordered_map<Axiom, Derivation, AxiomHash> candidates_;
};

}  // namespace

ReasoningTrace saturate(const KnowledgeBase& kb) {
  ReasoningTrace trace{kb, {}};
  Saturator s(kb);
  for (;;) {
    auto step = s.step();
    if (step.empty()) break;
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

bool entails(const KnowledgeBase& kb, const Axiom& query) {
  if (!query.isConclusionForm())
    throw UnsupportedQuery("entails: only 'C < D' and 'C < R . D' queries are supported, got '" +
                           renderAxiom(query) + "'");
  if (query.isReflexive() || kb.contains(query)) return true;
  return completionSet(saturate(kb)).contains(query);
}

std::set<Axiom> completionSet(const ReasoningTrace& trace) {
  std::set<Axiom> out;
  for (const auto& step : trace.steps)
    for (const auto& d : step) out.insert(d.conclusion);
  return out;
}

std::vector<RuleId> ruleIds(const ReasoningTrace& trace) {
  std::vector<RuleId> out;
  for (const auto& step : trace.steps)
    for (const auto& d : step) out.push_back(d.rule);
  return out;
}

std::string dumpTrace(const ReasoningTrace& trace) {
  std::string out;
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    for (const auto& d : trace.steps[t]) {
      out += "step " + std::to_string(t + 1) + " | rule " + std::to_string(d.rule) + " | " +
             renderAxiom(d.conclusion) + " <= ";
      for (std::size_t i = 0; i < d.premises.size(); ++i) {
        if (i) out += "; ";
        out += renderAxiom(d.premises[i]);
      }
      out += '\n';
    }
  }
  return out;
}

std::vector<ReasoningTrace> saturateAllSerial(std::span<const KnowledgeBase> kbs) {
  std::vector<ReasoningTrace> out;
  out.reserve(kbs.size());
  for (const auto& kb : kbs) out.push_back(saturate(kb));
  return out;
}

std::vector<ReasoningTrace> saturateAll(std::span<const KnowledgeBase> kbs) {
  std::vector<ReasoningTrace> out(kbs.size());
  const auto n = static_cast<long>(kbs.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) out[i] = saturate(kbs[i]);
  return out;
}

}  // namespace elnn
