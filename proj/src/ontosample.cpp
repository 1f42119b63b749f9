#include "elnn/ontosample.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "elnn/normalize.hpp"
#include "elnn/reasoner.hpp"

namespace elnn {

namespace {

std::string_view strip(std::string_view s) {
  if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

void widen(const ConceptExpr& e, Signature& sig) {
  if (e.kind == ConceptExpr::Kind::Name) sig.maxConcepts = std::max(sig.maxConcepts, e.index);
  if (e.kind == ConceptExpr::Kind::Exists || e.kind == ConceptExpr::Kind::Self)
    sig.maxRoles = std::max(sig.maxRoles, e.index);
  for (const auto& c : e.children) widen(c, sig);
}

}  // namespace

LoadedOntology parseOntology(std::string_view text) {
  std::optional<Signature> header;
  std::vector<std::pair<std::size_t, GeneralAxiom>> parsed;
  Signature seen{1, 1};

  std::size_t lineNo = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = strip(text.substr(pos, end - pos));
    pos = end + 1;
    ++lineNo;
    if (line.empty()) continue;
    if (!header && parsed.empty() && line.starts_with("sig ")) {
      std::istringstream in{std::string(line.substr(4))};
      long long c = 0, r = 0;
      if (!(in >> c >> r) || c < 1 || r < 1) throw ParseError(lineNo, "bad 'sig' header");
      header = Signature{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(r)};
      continue;
    }
    GeneralAxiom g;
    try {
      g = parseGeneralAxiom(line);
    } catch (const ParseError& e) {
      throw ParseError(lineNo, e.what());
    }
    if (g.kind == GeneralAxiom::Kind::RoleInclusion) {
      for (auto r : g.chain) seen.maxRoles = std::max(seen.maxRoles, r);
      seen.maxRoles = std::max(seen.maxRoles, g.superRole);
    } else {
      widen(g.lhs, seen);
      widen(g.rhs, seen);
    }
    parsed.emplace_back(lineNo, std::move(g));
  }

  const Signature sig = header.value_or(seen);
  LoadedOntology out;
  Normalizer norm(sig);
  for (const auto& [line, g] : parsed) {
    try {
      norm.add(g);
    } catch (const NormalizeError& e) {
      ++out.skipped;
      out.skippedText.push_back("line " + std::to_string(line) + ": " + e.what());
    }
  }
  if (norm.axioms().empty()) throw Error("ontology contains no usable EL+ axioms");
  out.kb = KnowledgeBase(norm.signature(), norm.axioms());
  return out;
}

LoadedOntology loadOntology(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open ontology file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parseOntology(ss.str());
}

KnowledgeBase compactNames(const KnowledgeBase& kb) {
  std::map<Name, std::uint32_t> remap;
  std::uint32_t nc = 0, nr = 0;
  for (const auto& a : kb.axioms())
    for (const auto& n : a.names())
      if (!remap.contains(n)) remap[n] = n.kind == NameKind::Concept ? ++nc : ++nr;

  KnowledgeBase out(Signature{std::max(nc, 1u), std::max(nr, 1u)});
  for (const auto& a : kb.axioms()) {
    std::array<std::uint32_t, 3> idx{};
    for (std::size_t i = 0; i < a.arity(); ++i) idx[i] = remap.at(a.name(i));
    out.add(Axiom::fromIndices(a.form(), std::span(idx.data(), a.arity())));
  }
  return out;
}

KnowledgeBase sampleConnected(const KnowledgeBase& kb, const SampleConfig& cfg) {
  if (cfg.size == 0) throw ConfigError("sample size must be positive");
  if (cfg.size > kb.size())
    throw ConfigError("sample size " + std::to_string(cfg.size) + " exceeds ontology size " +
                      std::to_string(kb.size()));

  std::map<Name, std::vector<std::size_t>> byName;
  for (std::size_t i = 0; i < kb.size(); ++i)
    for (const auto& n : kb[i].names()) byName[n].push_back(i);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pickStart(0, kb.size() - 1);
  std::size_t best = 0;

  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(cfg.retries, 1); ++attempt) {
    std::vector<std::size_t> chosen;
    std::unordered_set<std::size_t> inSample;
    std::vector<std::size_t> frontier;
    std::unordered_set<std::size_t> inFrontier;  // ever queued
    std::set<Name> expanded;

    const auto take = [&](std::size_t i) {
      chosen.push_back(i);
      inSample.insert(i);
      for (const auto& n : kb[i].names()) {
        if (!expanded.insert(n).second) continue;
        for (auto j : byName[n])
          if (!inSample.contains(j) && inFrontier.insert(j).second) frontier.push_back(j);
      }
    };

    take(pickStart(rng));
    while (chosen.size() < cfg.size && !frontier.empty()) {
      const auto k = std::uniform_int_distribution<std::size_t>(0, frontier.size() - 1)(rng);
      const auto j = frontier[k];
      frontier[k] = frontier.back();
      frontier.pop_back();
      take(j);
    }
    if (chosen.size() < cfg.size) continue;

    std::sort(chosen.begin(), chosen.end());
    std::vector<Axiom> axioms;
    axioms.reserve(chosen.size());
    for (auto i : chosen) axioms.push_back(kb[i]);
    const auto compact = compactNames(KnowledgeBase(kb.signature(), std::move(axioms)));
    const auto steps = saturate(compact).length();
    best = std::max(best, steps);
    if (steps >= cfg.minSteps) return anonymize(compact, rng()).kb;
  }
  throw SamplingFailure("no connected sample of " + std::to_string(cfg.size) + " axioms with >= " +
                            std::to_string(cfg.minSteps) + " reasoning steps after " +
                            std::to_string(cfg.retries) + " attempts (best " + std::to_string(best) + ")",
                        best);
}

}  // namespace elnn
