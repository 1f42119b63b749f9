#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "elnn/eval.hpp"
#include "elnn/syngen.hpp"
#include "oracle.hpp"

using namespace elnn;

namespace {
std::vector<Axiom> axioms(std::initializer_list<const char*> s) {
  std::vector<Axiom> v;
  for (const auto* x : s) v.push_back(parseAxiom(x));
  return v;
}
}  // namespace

TEST(CharDistance, Examples) {
  EXPECT_EQ(charDistance("C1 < C2", "C1 < C2"), 0u);
  EXPECT_EQ(charDistance("C1 < C2", "C1 < C3"), 1u);
  EXPECT_EQ(charDistance("C15 < C3", "C51 < C3"), 2u);
  EXPECT_EQ(charDistance("", "abc"), 3u);
}

TEST(CharDistance, MatchesOracle) {
  std::mt19937_64 rng(1);
  const Signature sig{40, 12};
  for (int i = 0; i < 2000; ++i) {
    const auto a = renderAxiom(oracle::randomAxiom(rng, sig)), b = renderAxiom(oracle::randomAxiom(rng, sig));
    ASSERT_EQ(charDistance(a, b), oracle::levenshtein(a, b)) << a << " | " << b;
  }
}

TEST(AtomicDistance, Examples) {
  EXPECT_EQ(atomicDistance("C15 < C3", "C15 < C4"), 1u);
  EXPECT_EQ(atomicDistance("C15 < C3", "C51 < C3"), 1u);
  EXPECT_EQ(atomicDistance("C15 < R12 . C3", "C15 < R12 . C3"), 0u);
  // Same number in both strings maps to the same symbol.
  EXPECT_EQ(atomicDistance("C15 < C27", "C27 < C15"), 2u);
}

// Tokens replaced by an independent substitution, then plain Levenshtein.
TEST(AtomicDistance, MatchesSubstitutionOracle) {
  std::mt19937_64 rng(2);
  const Signature sig{60, 30};
  auto substitute = [](const std::string& a, const std::string& b) {
    std::map<std::string, char> sym;
    std::string both = a + "\n" + b, out;
    char next = '!';
    auto fresh = [&] {
      while (both.find(next) != std::string::npos) ++next;
      return next++;
    };
    for (std::size_t i = 0; i < both.size();) {
      if (std::isdigit(static_cast<unsigned char>(both[i]))) {
        std::size_t j = i;
        while (j < both.size() && std::isdigit(static_cast<unsigned char>(both[j]))) ++j;
        const auto tok = both.substr(i, j - i);
        if (tok.size() >= 2) {
          if (!sym.count(tok)) sym[tok] = fresh();
          out += sym[tok];
        } else {
          out += tok;
        }
        i = j;
      } else {
        out += both[i++];
      }
    }
    const auto nl = out.find('\n');
    return std::pair{out.substr(0, nl), out.substr(nl + 1)};
  };
  for (int i = 0; i < 2000; ++i) {
    const auto a = renderAxiom(oracle::randomAxiom(rng, sig)), b = renderAxiom(oracle::randomAxiom(rng, sig));
    const auto [x, y] = substitute(a, b);
    ASSERT_EQ(atomicDistance(a, b), oracle::levenshtein(x, y)) << a << " | " << b;
  }
}

TEST(PredicateDistance, Examples) {
  EXPECT_EQ(predicateDistance("C1 < C3", "C2 < C3"), 1u);
  // R2 against C15 in the first slot: 2 + 15.
  EXPECT_EQ(predicateDistance("R2 . C1 < C3", "C15 & C1 < C3"), 17u);
  EXPECT_EQ(predicateDistance("C4 < R1 . C2", "C4 < R1 . C2"), 0u);
  // [0,1,2,0] against [1,3,2,0]: padding costs the concept's index, then |1 - 3|.
  EXPECT_EQ(predicateDistance("C1 < C2", "C1 & C3 < C2"), 3u);
  EXPECT_THROW(predicateDistance("C1 <", "C1 < C2"), ParseError);
}

TEST(PredicateDistance, Properties) {
  std::mt19937_64 rng(3);
  const Signature sig{20, 6};
  for (int i = 0; i < 3000; ++i) {
    const auto a = oracle::randomAxiom(rng, sig), b = oracle::randomAxiom(rng, sig);
    const auto d = predicateDistance(a, b);
    ASSERT_EQ(d, predicateDistance(b, a));
    ASSERT_EQ(d == 0, a == b);
  }
  // Near miss C3 vs C4 costs less than confusing kinds with equal index C3 vs R3.
  EXPECT_LT(predicateDistance("C1 < R1 . C3", "C1 < R1 . C4"), predicateDistance("R3 . C1 < C2", "C3 & C1 < C2"));
  EXPECT_EQ(predicateDistance("R3 . C1 < C2", "C3 & C1 < C2"), 6u);
}

TEST(BestMatch, Examples) {
  const auto s = bestMatchScore(axioms({"C1 < C2"}), axioms({"C1 < C2", "C1 < C3"}), Metric::Character);
  EXPECT_EQ(s.precision, 1.0);
  EXPECT_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.f1, 2.0 / 3.0);

  const auto e = bestMatchScore({}, axioms({"C1 < C2"}), Metric::Predicate);
  EXPECT_TRUE(e.precisionUndefined);
  EXPECT_EQ(e.recall, 0.0);
  EXPECT_EQ(e.f1, 0.0);

  const auto na = bestMatchScore(axioms({"C1 < C2"}), {}, Metric::Atomic);
  EXPECT_TRUE(na.recallUndefined);
  EXPECT_EQ(na.recall, 0.0);
}

TEST(BestMatch, IdenticalSets) {
  std::mt19937_64 rng(4);
  for (auto m : kAllMetrics) {
    std::vector<Axiom> a;
    for (int i = 0; i < 15; ++i) a.push_back(oracle::randomAxiom(rng, {12, 4}));
    const auto s = bestMatchScore(a, a, m);
    EXPECT_EQ(s.f1, 1.0);
    for (auto d : s.distances) EXPECT_EQ(d, 0u);
  }
}

TEST(BestMatch, NearestAndDuplicates) {
  const auto s = bestMatchScore(axioms({"C1 < C9", "C1 < C9", "C2 < C3"}), axioms({"C1 < C8", "C2 < C3"}),
                                Metric::Predicate);
  EXPECT_EQ(s.predictions, 2u);
  EXPECT_EQ(s.truePositives, 1u);
  EXPECT_EQ(s.distances, (std::vector<std::size_t>{1, 0}));
}

TEST(F1, Harmonic) {
  EXPECT_EQ(f1Score(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(f1Score(0.5, 1.0), 2.0 / 3.0);
}

TEST(Corrupt, ZeroIsIdentity) {
  const auto kb = generate(GenConfig::moderate(1));
  const auto c = corruptKB(kb, 0.0, 9);
  EXPECT_EQ(c.kb, kb);
  EXPECT_TRUE(c.corrupted.empty());
}

TEST(Corrupt, OneFlagsEverything) {
  const auto kb = generate(GenConfig::moderate(2));
  const auto c = corruptKB(kb, 1.0, 9);
  EXPECT_EQ(c.corrupted.size(), kb.size());
  ASSERT_EQ(c.kb.size(), kb.size());
  for (std::size_t i = 0; i < kb.size(); ++i) {
    EXPECT_EQ(c.kb[i].form(), kb[i].form());
    EXPECT_TRUE(c.kb[i].validIn(kb.signature()));
    EXPECT_FALSE(c.kb[i].isReflexive());
  }
  EXPECT_EQ(corruptKB(kb, 1.0, 9).kb, c.kb);
}

// 1000 axioms at p = 0.5: count within 3 sigma (sigma = sqrt(250)) of 500.
TEST(Corrupt, BinomialCount) {
  KnowledgeBase kb(Signature{200, 50});
  std::mt19937_64 rng(5);
  while (kb.size() < 1000) {
    const auto a = oracle::randomAxiom(rng, kb.signature());
    if (!a.isReflexive()) kb.add(a);
  }
  const auto c = corruptKB(kb, 0.5, 21);
  EXPECT_NEAR(static_cast<double>(c.corrupted.size()), 500.0, 3 * std::sqrt(250.0));
}

TEST(RandomAnswers, Basics) {
  const Signature sig{10, 3};
  EXPECT_TRUE(randomAnswers(sig, 0, 1).empty());
  const auto a = randomAnswers(sig, 200, 7);
  EXPECT_EQ(a, randomAnswers(sig, 200, 7));
  ASSERT_EQ(a.size(), 200u);
  for (const auto& x : a) {
    EXPECT_TRUE(x.isConclusionForm());
    EXPECT_TRUE(x.validIn(sig));
    EXPECT_FALSE(x.isReflexive());
  }
}

// A draw is Sub with probability 1/2 over C (C - 1) non-reflexive pairs and
// SubEx with probability 1/2 over C^2 R triples, so it hits one of the answers
// with probability nSub / (2 C (C - 1)) + nEx / (2 C^2 R). Over the moderate
// signature that is well under one percent, which caps expected precision.
TEST(RandomAnswers, F1NearZero) {
  const auto kb = generate(GenConfig::moderate(3));
  const auto tr = saturate(kb);
  const auto ans = completionSet(tr);
  const std::vector<Axiom> answers(ans.begin(), ans.end());
  const auto c = static_cast<double>(kb.signature().maxConcepts), r = static_cast<double>(kb.signature().maxRoles);
  double nSub = 0, nEx = 0;
  for (const auto& a : answers) (a.form() == Form::Sub ? nSub : nEx) += 1;
  const double perDraw = nSub / (2 * c * (c - 1)) + nEx / (2 * c * c * r);
  double f1 = 0;
  for (std::uint64_t s = 0; s < 20; ++s)
    f1 += bestMatchScore(randomAnswers(kb.signature(), 200, s), answers, Metric::Predicate).f1 / 20;
  EXPECT_LT(perDraw, 0.01);
  EXPECT_LT(f1, 0.05);
}

TEST(Aggregate, FoldAveraging) {
  // Fold 0 has a perfect prediction, fold 1 a miss at predicate distance 2.
  std::vector<SampleOutcome> o(2);
  o[0].fold = 0;
  o[0].answers = axioms({"C1 < C2"});
  o[0].predicted = axioms({"C1 < C2"});
  o[1].sample = 1;
  o[1].fold = 1;
  o[1].answers = axioms({"C1 < C2"});
  o[1].predicted = axioms({"C1 < C4"});
  const auto r = aggregate(0.0, o, 2);
  const auto& row = r.at(0.0, Metric::Predicate, Baseline::Reasoner);
  EXPECT_DOUBLE_EQ(row.meanDist, 1.0);
  // Extremes are per-fold, then averaged: min (0 + 2) / 2, max (0 + 2) / 2.
  EXPECT_EQ(row.minDist, 1.0);
  EXPECT_EQ(row.maxDist, 1.0);
  EXPECT_DOUBLE_EQ(row.precision, 0.5);
  EXPECT_DOUBLE_EQ(row.f1, 0.5);
  EXPECT_EQ(row.foldCount, 2u);
  EXPECT_EQ(r.rows.size(), 9u);
  // Nothing predicted for the random baseline: no scored fold, undefined mean.
  EXPECT_EQ(r.at(0.0, Metric::Predicate, Baseline::Random).foldCount, 0u);
  EXPECT_TRUE(std::isnan(r.at(0.0, Metric::Predicate, Baseline::Random).meanDist));
  const auto csv = renderReportCsv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "level,metric,baseline,mean_dist,min_dist,max_dist,precision,recall,f1,fold_count");
  EXPECT_NE(csv.find("nan"), std::string::npos);
}
