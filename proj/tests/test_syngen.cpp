#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "elnn/ontosample.hpp"
#include "elnn/reasoner.hpp"
#include "elnn/syngen.hpp"
#include "oracle.hpp"

using namespace elnn;

namespace {

GenConfig structuredOnly(std::uint32_t k, std::uint64_t seed) {
  GenConfig c;
  c.iterations = k;
  c.randomAxioms = 0;
  c.seed = seed;
  return c;
}

std::map<RuleId, std::size_t> ruleCounts(const ReasoningTrace& tr) {
  std::map<RuleId, std::size_t> m;
  for (auto r : ruleIds(tr)) ++m[r];
  return m;
}

}  // namespace

TEST(Syngen, OneIterationFiresEveryRuleAtStepOne) {
  const auto tr = saturate(generate(structuredOnly(1, 5)));
  ASSERT_GE(tr.length(), 1u);
  std::set<RuleId> first;
  for (const auto& d : tr.steps[0]) first.insert(d.rule);
  EXPECT_EQ(first, (std::set<RuleId>{1, 2, 3, 4, 5, 6}));
}

TEST(Syngen, LowerBoundAndCoverage) {
  for (std::uint32_t k = 1; k <= 5; ++k)
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto kb = generate(structuredOnly(k, s));
      EXPECT_EQ(kb.size(), structuredCount(k));
      const auto tr = saturate(kb);
      EXPECT_GE(tr.length(), k);
      const auto m = ruleCounts(tr);
      for (RuleId r = 1; r <= 6; ++r) EXPECT_GE(m.count(r) ? m.at(r) : 0, k) << "rule " << r;
      EXPECT_TRUE(isConnected(kb.axioms()));
    }
}

TEST(Syngen, RandomPartCountAndConnected) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto cfg = GenConfig::moderate(s);
    const auto kb = generate(cfg);
    EXPECT_EQ(kb.size(), structuredCount(cfg.iterations) + cfg.randomAxioms);
    EXPECT_TRUE(isConnected(kb.axioms()));
    EXPECT_GE(saturate(kb).length(), cfg.iterations);
  }
}

TEST(Syngen, DeterministicAndSeedSensitive) {
  const auto cfg = GenConfig::moderate(9);
  EXPECT_EQ(renderKB(generate(cfg)), renderKB(generate(cfg)));
  EXPECT_NE(renderKB(generate(cfg)), renderKB(generate(GenConfig::moderate(10))));
}

TEST(Syngen, SignatureTooSmall) {
  auto cfg = GenConfig::moderate(1);
  cfg.maxConcepts = 5;
  EXPECT_THROW(generate(cfg), ConfigError);
}

TEST(Syngen, Batch) {
  auto cfg = GenConfig::moderate(100);
  EXPECT_TRUE(generateBatch(cfg, 0).empty());
  const auto b = generateBatch(cfg, 3);
  ASSERT_EQ(b.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    auto c = cfg;
    c.seed = cfg.seed + i;
    EXPECT_EQ(b[i], generate(c));
  }
}

// --- ontology sampling ---

TEST(Ontology, ParsesCanonicalAndSkipsSelf) {
  const auto o = parseOntology("sig 3 1\nC1 < C2\nC2 < C3\nC3 < R1 . C1\n");
  EXPECT_EQ(o.kb.size(), 3u);
  EXPECT_EQ(o.skipped, 0u);
  const auto s = parseOntology("sig 3 1\nC1 < C2\nTop < R1 . Self\nC2 < C3\n");
  EXPECT_EQ(s.kb.size(), 2u);
  EXPECT_EQ(s.skipped, 1u);
}

TEST(Ontology, CountsAgreeWithLines) {
  // Generated dump with comments and a few non-EL lines mixed in.
  std::string text = "# dump\n";
  std::size_t axiomLines = 0, skips = 0;
  const auto kb = generate(GenConfig::moderate(77));
  text += "sig " + std::to_string(kb.signature().maxConcepts) + " " + std::to_string(kb.signature().maxRoles) + "\n";
  for (std::size_t i = 0; i < kb.size(); ++i) {
    text += renderAxiom(kb[i]) + "\n";
    ++axiomLines;
    if (i % 10 == 0) {
      text += "# note\nTop < R1 . Self\n";
      ++skips;
    }
  }
  const auto o = parseOntology(text);
  EXPECT_EQ(o.skipped, skips);
  EXPECT_EQ(o.kb.size(), axiomLines);
}

TEST(Ontology, NormalizesGeneralLines) {
  const auto o = parseOntology("C1 = C2 & C3\nC4 < R1 . (C1 & C5)\n");
  for (const auto& a : o.kb.axioms()) EXPECT_TRUE(a.validIn(o.kb.signature()));
  EXPECT_GT(o.kb.signature().maxConcepts, 5u);
}

TEST(Ontology, LoadErrors) {
  EXPECT_THROW(loadOntology("/nonexistent/file.kb"), Error);
  EXPECT_THROW(parseOntology("# nothing\nTop < R1 . Self\n"), Error);
}

TEST(Sample, WholeKB) {
  const auto kb = generate(structuredOnly(2, 3));
  SampleConfig c;
  c.size = kb.size();
  c.minSteps = 0;
  c.seed = 1;
  const auto s = sampleConnected(kb, c);
  EXPECT_EQ(s.size(), kb.size());
  EXPECT_EQ(completionSet(saturate(s)).size(), completionSet(saturate(kb)).size());
}

TEST(Sample, SingleAxiom) {
  const auto kb = generate(GenConfig::moderate(4));
  SampleConfig c;
  c.size = 1;
  c.minSteps = 0;
  const auto s = sampleConnected(kb, c);
  EXPECT_EQ(s.size(), 1u);
}

TEST(Sample, ActivityAndConnectivity) {
  GenConfig g;
  g.iterations = 6;
  g.randomAxioms = 200 - structuredCount(6);
  g.seed = 12;
  const auto kb = generate(g);
  ASSERT_EQ(kb.size(), 200u);
  ASSERT_GE(saturate(kb).length(), 6u);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SampleConfig c;
    c.size = 20;
    c.minSteps = 3;
    c.seed = seed;
    const auto s = sampleConnected(kb, c);
    EXPECT_EQ(s.size(), 20u);
    EXPECT_TRUE(isConnected(s.axioms()));
    EXPECT_GE(saturate(s).length(), 3u);
    EXPECT_TRUE(s.labels().empty());
  }
}

TEST(Sample, ImpossibleActivityFails) {
  const auto kb = parseKB("sig 4 1\nC1 < C2\nC3 < C4\nC2 < C3\n");
  SampleConfig c;
  c.size = 2;
  c.minSteps = 5;
  c.retries = 20;
  EXPECT_THROW(sampleConnected(kb, c), SamplingFailure);
}

TEST(Sample, CompactShrinksSignature) {
  const auto kb = parseKB("sig 30 9\nC12 < C20\nC20 < R7 . C12\n");
  const auto c = compactNames(kb);
  EXPECT_EQ(c.signature(), (Signature{2, 1}));
  EXPECT_EQ(c.size(), 2u);
}
