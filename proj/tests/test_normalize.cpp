#include <gtest/gtest.h>

#include <set>

#include "elnn/normalize.hpp"
#include "oracle.hpp"

using namespace elnn;

namespace {

Normalized norm(std::initializer_list<const char*> lines, Signature sig) {
  std::vector<GeneralAxiom> in;
  for (const auto* l : lines) in.push_back(parseGeneralAxiom(l));
  return normalize(in, sig);
}

std::set<std::string> rendered(const std::vector<Axiom>& v) {
  std::set<std::string> s;
  for (const auto& a : v) s.insert(renderAxiom(a));
  return s;
}

// Entailed Sub / SubEx statements restricted to names within `orig`.
std::set<Axiom> entailedOver(const Normalized& n, Signature orig) {
  const KnowledgeBase kb(n.signature, n.axioms);
  std::set<Axiom> all = oracle::saturate(kb);
  for (const auto& a : n.axioms)
    if (a.isConclusionForm()) all.insert(a);
  std::set<Axiom> out;
  for (const auto& a : all)
    if (a.validIn(orig)) out.insert(a);
  return out;
}

}  // namespace

TEST(Normalize, EquivalenceSplits) {
  const auto n = norm({"C1 = C2"}, {2, 1});
  EXPECT_EQ(rendered(n.axioms), (std::set<std::string>{"C1 < C2", "C2 < C1"}));
  EXPECT_EQ(n.signature, (Signature{2, 1}));
}

TEST(Normalize, AlreadyNormal) {
  const auto n = norm({"C1 < C2"}, {2, 1});
  ASSERT_EQ(n.axioms.size(), 1u);
  EXPECT_EQ(n.axioms[0], Axiom::sub(Concept{1}, Concept{2}));
}

TEST(Normalize, NestedFillerGetsFreshName) {
  const auto n = norm({"C1 < R1 . (C2 & C3)"}, {3, 1});
  EXPECT_EQ(n.signature, (Signature{4, 1}));
  EXPECT_EQ(rendered(n.axioms), (std::set<std::string>{"C1 < R1 . C4", "C4 < C2", "C4 < C3"}));
}

// With context axioms over the original names, the nested form and its
// normalization must entail the same statements over {C1..C6, R1}.
TEST(Normalize, NestedFillerEntailmentsOverOriginalNames) {
  const Signature orig{6, 1};
  const auto n = norm({"C1 < R1 . (C2 & C3)", "R1 . C2 < C5", "R1 . C3 < C6", "C5 & C6 < C4"}, orig);
  const auto got = entailedOver(n, orig);
  // The completion rules only name told existential subsumers, so the named
  // consequences are C1 < C5, C1 < C6 and C1 < C4.
  for (const char* s : {"C1 < C5", "C1 < C6", "C1 < C4"})
    EXPECT_TRUE(got.count(parseAxiom(s))) << s;
  // Nothing about C2, C3 alone: they are unconstrained.
  for (const auto& a : got) EXPECT_EQ(a.arg(0), 1u) << renderAxiom(a);
}

TEST(Normalize, ConjunctionOnLeftAndLongChain) {
  const auto n = norm({"C1 & C2 & C3 < C4", "R1 * R2 * R3 < R1"}, {4, 3});
  for (const auto& a : n.axioms) EXPECT_TRUE(a.validIn(n.signature));
  const Signature orig{4, 3};
  // C1 & C2 & C3 < C4 with C5 < C1, C5 < C2, C5 < C3 gives C5 < C4.
  auto n2 = norm({"C1 & C2 & C3 < C4", "C5 < C1", "C5 < C2", "C5 < C3"}, {5, 1});
  EXPECT_TRUE(entailedOver(n2, {5, 1}).count(parseAxiom("C5 < C4")));
  // Long chain: C1 < R1.C2, C2 < R2.C3, C3 < R3.C4 gives C1 < R1.C4.
  auto n3 = norm({"R1 * R2 * R3 < R1", "C1 < R1 . C2", "C2 < R2 . C3", "C3 < R3 . C4"}, orig);
  EXPECT_TRUE(entailedOver(n3, orig).count(parseAxiom("C1 < R1 . C4")));
  EXPECT_FALSE(entailedOver(n3, orig).count(parseAxiom("C1 < R1 . C3")));
}

TEST(Normalize, ExistentialOnLeftNested) {
  const Signature orig{4, 2};
  auto n = norm({"R1 . (R2 . C1) < C2", "C3 < R1 . C4", "C4 < R2 . C1"}, orig);
  EXPECT_TRUE(entailedOver(n, orig).count(parseAxiom("C3 < C2")));
}

TEST(Normalize, Idempotent) {
  const auto once = norm({"C1 < R1 . (C2 & R2 . C3)", "R1 . C2 & C3 < C1", "C1 = C3 & C2"}, {3, 2});
  std::vector<GeneralAxiom> again;
  for (const auto& a : once.axioms) again.push_back(toGeneral(a));
  const auto twice = normalize(again, once.signature);
  EXPECT_EQ(twice.axioms, once.axioms);
  EXPECT_EQ(twice.signature, once.signature);
}

TEST(Normalize, RejectsOutsideEL) {
  EXPECT_THROW(norm({"Top < R1 . Self"}, {1, 1}), NormalizeError);
  EXPECT_THROW(norm({"C1 < Bottom"}, {1, 1}), NormalizeError);
  try {
    norm({"C1 < C2", "C2 < R1 . Self"}, {2, 1});
    FAIL();
  } catch (const NormalizeError& e) {
    EXPECT_NE(e.axiom().find("Self"), std::string::npos);
  }
}
