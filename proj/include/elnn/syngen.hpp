#pragma once

#include <cstdint>
#include <vector>

#include "elnn/kb.hpp"

namespace elnn {

/// Synthetic KB generator settings.
///
/// The structured part repeats a gadget `iterations` times. Each repetition
/// fires all six completion rules on the seed concept and can only start once
/// the previous repetition has finished, which forces the trace length to be at
/// least `iterations`. The random part draws `randomAxioms` axioms over a
/// separate name pool that shares only the seed concept with the gadget.
struct GenConfig {
  std::uint32_t iterations = 4;
  std::uint32_t randomAxioms = 70;
  std::uint32_t randomConcepts = 30;  // random pool size, excluding the seed concept
  std::uint32_t randomRoles = 30;
  std::uint32_t maxConcepts = 0;  // 0: exactly what the structured and random pools need
  std::uint32_t maxRoles = 0;
  bool shuffleNames = true;  // random name numbering and axiom order
  std::uint64_t seed = 0;

  /// Default difficulty: `iterations` gadget repetitions plus twice as many random axioms.
  static GenConfig moderate(std::uint64_t seed, std::uint32_t iterations = 4);
};

/// Axiom count of the structured part.
constexpr std::uint32_t structuredCount(std::uint32_t iterations) { return 3 + 8 * iterations; }
constexpr std::uint32_t structuredConcepts(std::uint32_t iterations) { return 4 + 6 * iterations; }
constexpr std::uint32_t structuredRoles(std::uint32_t iterations) { return 1 + 4 * iterations; }

/// Throws ConfigError when the signature cannot hold the requested pools.
KnowledgeBase generate(const GenConfig& cfg);

/// KBs for seeds cfg.seed, cfg.seed + 1, ...; generated in parallel.
std::vector<KnowledgeBase> generateBatch(const GenConfig& cfg, std::size_t count);

}  // namespace elnn
