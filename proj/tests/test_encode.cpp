#include <gtest/gtest.h>

#include <filesystem>

#include "elnn/encode.hpp"
#include "elnn/syngen.hpp"
#include "oracle.hpp"

using namespace elnn;

namespace {
const Signature kSig41{4, 1};

Encoded4 enc(const char* s, Signature sig = kSig41) { return encodeAxiom(parseAxiom(s), sig); }
}  // namespace

TEST(Encode, WorkedExamples) {
  EXPECT_EQ(enc("C2 < C1"), (Encoded4{0.0, 0.5, 0.25, 0.0}));
  EXPECT_EQ(enc("C4 < R1 . C2"), (Encoded4{0.0, 1.0, -1.0, 0.5}));
  EXPECT_EQ(enc("C3 & C4 < C2"), (Encoded4{0.75, 1.0, 0.5, 0.0}));
}

TEST(Encode, RemainingLayouts) {
  const Signature sig{4, 2};
  EXPECT_EQ(enc("R1 . C2 < C4", sig), (Encoded4{-0.5, 0.5, 1.0, 0.0}));
  EXPECT_EQ(enc("R1 < R2", sig), (Encoded4{0.0, -0.5, -1.0, 0.0}));
  EXPECT_EQ(enc("R2 * R1 < R2", sig), (Encoded4{-1.0, -0.5, -1.0, 0.0}));
}

TEST(Encode, OutOfBound) { EXPECT_THROW(enc("C5 < C1"), Error); }

TEST(Encode, KBVector) {
  const auto kb = parseKB("sig 4 1\nC2 < C1\nC3 < C4\nC4 < R1 . C2\n");
  const std::vector<double> want{0.0, 0.5, 0.25, 0.0, 0.0, 0.75, 1.0, 0.0, 0.0, 1.0, -1.0, 0.5};
  EXPECT_EQ(encodeKB(kb), want);
  EXPECT_TRUE(encodeKB(KnowledgeBase(kSig41)).empty());
  EXPECT_EQ(decodeStatements(want, kSig41), kb.axioms());
}

TEST(Decode, Examples) {
  EXPECT_EQ(decodeAxiom(Encoded4{0.0, 0.5, 0.25, 0.0}, kSig41), parseAxiom("C2 < C1"));
  EXPECT_FALSE(decodeAxiom(Encoded4{0.0, 0.0, 0.0, 0.0}, kSig41));
  // 0.01*4 and -0.02*1 round to 0; 0.52*4 = 2.08 -> 2; 0.26*4 = 1.04 -> 1.
  EXPECT_EQ(decodeAxiom(Encoded4{0.01, 0.52, 0.26, -0.02}, kSig41), parseAxiom("C2 < C1"));
}

TEST(Decode, RoundingAndClamping) {
  // 0.625 * 4 = 2.5 rounds away from zero to 3; 1.7 * 4 clamps to 4.
  EXPECT_EQ(decodeAxiom(Encoded4{0.0, 0.625, 1.7, 0.0}, kSig41), parseAxiom("C3 < C4"));
  // Role slot -0.6 with 1 role rounds to R1; concept-role-concept in slots 1..3.
  EXPECT_EQ(decodeAxiom(Encoded4{0.0, 0.3, -0.6, 0.3}, kSig41), parseAxiom("C1 < R1 . C1"));
  // Pattern matching no form.
  EXPECT_FALSE(decodeAxiom(Encoded4{0.5, 0.0, 0.0, 0.5}, kSig41));
  EXPECT_FALSE(decodeAxiom(Encoded4{-1.0, -1.0, -1.0, -1.0}, kSig41));
}

// decode o encode = id, exhaustively for 50 concepts and 20 roles.
TEST(Encode, ExhaustiveRoundTrip) {
  const Signature sig{50, 20};
  std::size_t n = 0;
  for (const Form f : kAllForms) {
    const auto k = arity(f);
    std::vector<std::uint32_t> bound(k), idx(k, 1);
    for (std::size_t i = 0; i < k; ++i) bound[i] = slotKind(f, i) == NameKind::Concept ? 50 : 20;
    for (;;) {
      const auto a = Axiom::fromIndices(f, idx);
      const auto e = encodeAxiom(a, sig);
      for (double v : e) ASSERT_TRUE(v >= -1.0 && v <= 1.0);
      const auto d = decodeAxiom(e, sig);
      ASSERT_TRUE(d && *d == a) << renderAxiom(a);
      ++n;
      std::size_t p = 0;
      while (p < k && ++idx[p] > bound[p]) idx[p++] = 1;
      if (p == k) break;
    }
  }
  EXPECT_EQ(n, 2500u + 125000 + 50000 + 50000 + 400 + 8000);
}

// A name encodes to the same value in every KB over the same signature.
TEST(Encode, NoEmbedding) {
  const Signature sig{10, 3};
  const auto a = encodeAxiom(parseAxiom("C7 < R2 . C3"), sig);
  const auto kb1 = parseKB("sig 10 3\nC1 < C7\nC7 < R2 . C3\n");
  const auto kb2 = parseKB("sig 10 3\nC7 < R2 . C3\nC3 < C9\nC9 & C1 < C2\n");
  const auto v1 = encodeKB(kb1), v2 = encodeKB(kb2);
  EXPECT_TRUE(std::equal(a.begin(), a.end(), v1.begin() + 4));
  EXPECT_TRUE(std::equal(a.begin(), a.end(), v2.begin()));
  EXPECT_EQ(a[1], 0.7);
  EXPECT_EQ(a[2], -2.0 / 3.0);
}

TEST(Dataset, ShapeArithmetic) {
  // 3 axioms, trace of 2 steps, at most 2 conclusions per step.
  const auto kb = parseKB("sig 4 1\nC1 < C2\nC2 < C3\nC3 < C4\n");
  const std::vector<Sample> s{prepareSample(kb)};
  ASSERT_EQ(s[0].trace.length(), 2u);
  const auto d = buildDataset(s);
  EXPECT_EQ(d.X.samples, 1u);
  EXPECT_EQ(d.steps(), 2u);
  EXPECT_EQ(d.kbWidth(), 12u);
  EXPECT_EQ(d.outWidth(), 8u);
  EXPECT_EQ(d.supportWidth(), 12u);
  // X replicated; S at step 2 is enc(a) | enc(b) | enc(c).
  for (std::size_t k = 0; k < 12; ++k) EXPECT_EQ(d.X.at(0, 0, k), d.X.at(0, 1, k));
  const auto e = encodeKB(kb);
  for (std::size_t k = 0; k < 12; ++k) EXPECT_EQ(d.S.at(0, 1, k), e[k]);
  // Y at step 2 is C1 < C4 then padding.
  const auto y = encodeAxiom(parseAxiom("C1 < C4"), kb.signature());
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(d.Y.at(0, 1, k), y[k]);
  for (std::size_t k = 4; k < 8; ++k) EXPECT_EQ(d.Y.at(0, 1, k), 0.0);
}

TEST(Dataset, PaddingAcrossSamples) {
  const auto shortKB = parseKB("sig 3 1\nC1 < C2\nC2 < C3\n");
  auto longCfg = GenConfig{};
  longCfg.iterations = 4;
  longCfg.randomAxioms = 0;
  const auto longKB = generate(longCfg);
  const std::vector<Sample> s{prepareSample(shortKB), prepareSample(longKB)};
  const auto d = buildDataset(s);
  EXPECT_EQ(d.steps(), s[1].trace.length());
  ASSERT_GE(d.steps(), 4u);
  EXPECT_EQ(d.traceLengths, (std::vector<std::size_t>{1, s[1].trace.length()}));
  for (std::size_t t = 1; t < d.steps(); ++t)
    for (std::size_t k = 0; k < d.outWidth(); ++k) {
      EXPECT_EQ(d.Y.at(0, t, k), 0.0);
      EXPECT_EQ(d.S.at(0, t, k < d.supportWidth() ? k : 0), 0.0);
    }
  // Scaling uses the dataset-wide signature.
  EXPECT_EQ(d.signature.maxConcepts, longKB.signature().maxConcepts);
}

TEST(Dataset, RejectsEmptyTrace) {
  const std::vector<Sample> s{prepareSample(parseKB("sig 3 1\nC1 < C2\nC2 < C3\n")),
                              prepareSample(parseKB("sig 2 1\nC1 < C2\n"))};
  try {
    buildDataset(s);
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
  EXPECT_THROW(buildDataset(std::span<const Sample>{}), DatasetError);
}

TEST(Dataset, BinaryRoundTrip) {
  std::vector<KnowledgeBase> kbs;
  for (std::uint64_t s = 0; s < 3; ++s) kbs.push_back(generate(GenConfig::moderate(s, 2)));
  const auto d = buildDataset(prepareSamples(kbs));
  const auto p = std::filesystem::temp_directory_path() / "elnn_dataset_test.bin";
  writeDataset(p.string(), d);
  const auto r = readDataset(p.string());
  EXPECT_EQ(r.X, d.X);
  EXPECT_EQ(r.S, d.S);
  EXPECT_EQ(r.Y, d.Y);
  EXPECT_EQ(r.signature, d.signature);
  std::filesystem::remove(p);
}
