#include "elnn/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

namespace elnn {

std::string toString(Metric m) {
  switch (m) {
    case Metric::Character:
      return "character";
    case Metric::Atomic:
      return "atomic";
    case Metric::Predicate:
      return "predicate";
  }
  return "?";
}

std::string toString(Baseline b) {
  switch (b) {
    case Baseline::Reasoner:
      return "reasoner";
    case Baseline::Random:
      return "random";
    case Baseline::Corrupted:
      return "corrupted";
  }
  return "?";
}

Metric parseMetric(const std::string& s) {
  for (auto m : kAllMetrics)
    if (toString(m) == s) return m;
  throw ConfigError("unknown metric '" + s + "' (character, atomic, predicate)");
}

std::size_t charDistance(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

bool isDigit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Replaces multi-digit runs using `table`, adding entries with fresh symbols as needed.
std::string substituteNumbers(std::string_view s, std::map<std::string, char>& table, std::string& pool) {
  std::string out;
  for (std::size_t i = 0; i < s.size();) {
    if (!isDigit(s[i])) {
      out += s[i++];
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && isDigit(s[j])) ++j;
    const std::string tok(s.substr(i, j - i));
    if (tok.size() < 2) {
      out += tok;
    } else {
      auto it = table.find(tok);
      if (it == table.end()) {
        if (pool.empty()) throw Error("atomicDistance: ran out of substitution symbols");
        it = table.emplace(tok, pool.front()).first;
        pool.erase(pool.begin());
      }
      out += it->second;
    }
    i = j;
  }
  return out;
}

}  // namespace

std::size_t atomicDistance(std::string_view a, std::string_view b) {
  std::string pool;
  for (int c = 33; c < 127; ++c) {
    const char ch = static_cast<char>(c);
    if (isDigit(ch) || a.find(ch) != std::string_view::npos || b.find(ch) != std::string_view::npos) continue;
    pool += ch;
  }
  std::map<std::string, char> table;
  const auto sa = substituteNumbers(a, table, pool);
  const auto sb = substituteNumbers(b, table, pool);
  return charDistance(sa, sb);
}

std::size_t predicateDistance(const Axiom& guess, const Axiom& actual) {
  const auto g = slotLayout(guess), a = slotLayout(actual);
  std::size_t d = 0;
  for (std::size_t s = 0; s < 4; ++s) {
    const auto gi = g[s].index, ai = a[s].index;
    if (gi == 0 || ai == 0 || g[s].kind == a[s].kind)
      d += gi > ai ? gi - ai : ai - gi;
    else
      d += gi + ai;
  }
  return d;
}

std::size_t predicateDistance(std::string_view guess, std::string_view actual) {
  return predicateDistance(parseAxiom(guess), parseAxiom(actual));
}

std::size_t distance(Metric m, const Axiom& a, const Axiom& b) {
  switch (m) {
    case Metric::Character:
      return charDistance(renderAxiom(a), renderAxiom(b));
    case Metric::Atomic:
      return atomicDistance(renderAxiom(a), renderAxiom(b));
    case Metric::Predicate:
      return predicateDistance(a, b);
  }
  return 0;
}

double f1Score(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

namespace {

std::vector<Axiom> distinct(std::span<const Axiom> xs) {
  std::vector<Axiom> out;
  std::unordered_set<Axiom, AxiomHash> seen;
  for (const auto& a : xs)
    if (seen.insert(a).second) out.push_back(a);
  return out;
}

}  // namespace

MatchScore bestMatchScore(std::span<const Axiom> predictions, std::span<const Axiom> answers, Metric metric) {
  const auto pred = distinct(predictions), ans = distinct(answers);
  MatchScore s;
  s.predictions = pred.size();
  s.answers = ans.size();
  s.precisionUndefined = pred.empty();
  s.recallUndefined = ans.empty();
  if (!ans.empty()) {
    std::vector<std::string> ansText;
    if (metric != Metric::Predicate)
      for (const auto& a : ans) ansText.push_back(renderAxiom(a));
    for (const auto& p : pred) {
      std::size_t best = std::numeric_limits<std::size_t>::max();
      const auto pt = metric != Metric::Predicate ? renderAxiom(p) : std::string{};
      for (std::size_t k = 0; k < ans.size() && best > 0; ++k) {
        const std::size_t d = metric == Metric::Predicate ? predicateDistance(p, ans[k])
                              : metric == Metric::Atomic  ? atomicDistance(pt, ansText[k])
                                                          : charDistance(pt, ansText[k]);
        best = std::min(best, d);
      }
      s.distances.push_back(best);
      if (best == 0) ++s.truePositives;
    }
  }
  s.precision = s.precisionUndefined ? 0.0 : static_cast<double>(s.truePositives) / s.predictions;
  s.recall = s.recallUndefined ? 0.0 : static_cast<double>(s.truePositives) / s.answers;
  s.f1 = f1Score(s.precision, s.recall);
  return s;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) { return mix(mix(mix(a) ^ b) ^ c); }

Axiom redraw(const Axiom& a, const Signature& sig, std::mt19937_64& rng) {
  std::array<std::uint32_t, 3> idx{};
  for (std::size_t i = 0; i < a.arity(); ++i) {
    const auto bound = slotKind(a.form(), i) == NameKind::Concept ? sig.maxConcepts : sig.maxRoles;
    idx[i] = std::uniform_int_distribution<std::uint32_t>(1, bound)(rng);
  }
  return Axiom::fromIndices(a.form(), std::span(idx.data(), a.arity()));
}

}  // namespace

Corruption corruptKB(const KnowledgeBase& kb, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("corruption probability must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution pick(p);
  const auto n = kb.size();
  std::vector<bool> chosen(n);
  for (std::size_t i = 0; i < n; ++i) chosen[i] = pick(rng);

  std::unordered_set<Axiom, AxiomHash> taken;
  for (std::size_t i = 0; i < n; ++i)
    if (!chosen[i]) taken.insert(kb[i]);

  Corruption c{KnowledgeBase(kb.signature()), {}};
  for (std::size_t i = 0; i < n; ++i) {
    if (!chosen[i]) {
      c.kb.add(kb[i]);
      continue;
    }
    c.corrupted.push_back(i);
    Axiom a = redraw(kb[i], kb.signature(), rng);
    for (int tries = 0; tries < 64 && (a.isReflexive() || taken.contains(a)); ++tries)
      a = redraw(kb[i], kb.signature(), rng);
    taken.insert(a);
    c.kb.add(a);  // a collision that survived the retries is dropped here
  }
  return c;
}

std::vector<Axiom> randomAnswers(const Signature& sig, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> conceptIdx(1, sig.maxConcepts), role(1, sig.maxRoles);
  std::bernoulli_distribution existential(0.5);
  std::vector<Axiom> out;
  out.reserve(count);
  while (out.size() < count) {
    const Concept c{conceptIdx(rng)};
    if (existential(rng)) {
      const Role r{role(rng)};
      out.push_back(Axiom::subEx(c, r, Concept{conceptIdx(rng)}));
    } else {
      const Concept d{conceptIdx(rng)};
      if (c.index == d.index && sig.maxConcepts > 1) continue;
      out.push_back(Axiom::sub(c, d));
    }
  }
  return out;
}

void Pooled::add(const MatchScore& s) {
  for (auto d : s.distances) {
    minDist = count == 0 ? d : std::min(minDist, d);
    maxDist = count == 0 ? d : std::max(maxDist, d);
    sumDist += static_cast<double>(d);
    ++count;
  }
  truePositives += s.truePositives;
  predictions += s.predictions;
  answers += s.answers;
}

void Pooled::merge(const Pooled& o) {
  if (o.count > 0) {
    minDist = count == 0 ? o.minDist : std::min(minDist, o.minDist);
    maxDist = count == 0 ? o.maxDist : std::max(maxDist, o.maxDist);
  }
  sumDist += o.sumDist;
  count += o.count;
  truePositives += o.truePositives;
  predictions += o.predictions;
  answers += o.answers;
}

double Pooled::meanDist() const {
  return count ? sumDist / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}
double Pooled::precision() const { return predictions ? static_cast<double>(truePositives) / predictions : 0.0; }
double Pooled::recall() const { return answers ? static_cast<double>(truePositives) / answers : 0.0; }

const ReportRow& EvalReport::at(double level, Metric m, Baseline b) const {
  for (const auto& r : rows)
    if (std::abs(r.level - level) < 1e-9 && r.metric == m && r.baseline == b) return r;
  throw Error("no report row for level " + std::to_string(level) + ", " + toString(m) + ", " + toString(b));
}

namespace {

const std::vector<Axiom>& pick(const SampleOutcome& o, Baseline b) {
  switch (b) {
    case Baseline::Reasoner:
      return o.predicted;
    case Baseline::Random:
      return o.random;
    case Baseline::Corrupted:
      return o.corrupted;
  }
  return o.predicted;
}

std::vector<Axiom> flatten(const std::vector<std::vector<Axiom>>& steps) {
  std::vector<Axiom> out;
  for (const auto& s : steps) out.insert(out.end(), s.begin(), s.end());
  return out;
}

std::vector<Axiom> conclusions(const ReasoningTrace& t) {
  std::vector<Axiom> out;
  for (const auto& step : t.steps)
    for (const auto& d : step) out.push_back(d.conclusion);
  return out;
}

}  // namespace

EvalReport aggregate(double level, std::span<const SampleOutcome> outcomes, std::size_t folds) {
  EvalReport rep;
  for (auto metric : kAllMetrics) {
    for (auto base : kAllBaselines) {
      // Scores are computed per sample in parallel, then pooled per fold in sample order.
      std::vector<MatchScore> scores(outcomes.size());
      const auto n = static_cast<long>(outcomes.size());
#pragma omp parallel for schedule(dynamic)
      for (long i = 0; i < n; ++i) scores[i] = bestMatchScore(pick(outcomes[i], base), outcomes[i].answers, metric);

      std::vector<Pooled> perFold(folds);
      for (std::size_t i = 0; i < outcomes.size(); ++i) perFold.at(outcomes[i].fold).add(scores[i]);

      ReportRow row{level, metric, base};
      double p = 0.0, r = 0.0, f = 0.0;
      for (const auto& pf : perFold) {
        p += pf.precision();
        r += pf.recall();
        f += f1Score(pf.precision(), pf.recall());
        if (pf.count == 0) continue;
        row.meanDist += pf.meanDist();
        row.minDist += static_cast<double>(pf.minDist);
        row.maxDist += static_cast<double>(pf.maxDist);
        ++row.foldCount;
      }
      if (row.foldCount) {
        const double k = static_cast<double>(row.foldCount);
        row.meanDist /= k;
        row.minDist /= k;
        row.maxDist /= k;
      } else {
        row.meanDist = row.minDist = row.maxDist = std::numeric_limits<double>::quiet_NaN();
      }
      const double nf = folds ? static_cast<double>(folds) : 1.0;
      row.precision = p / nf;
      row.recall = r / nf;
      row.f1 = f / nf;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

SweepResult runSweep(std::span<const Sample> samples, const DatasetTensors& data, std::span<const FoldResult> folds,
                     const SweepConfig& cfg) {
  if (samples.size() != data.X.samples) throw DatasetError("runSweep: sample list does not match the dataset");
  SweepResult res;
  for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
    const double level = cfg.levels[li];
    std::vector<SampleOutcome> outcomes;
    for (std::size_t f = 0; f < folds.size(); ++f)
      for (auto i : folds[f].split.test) outcomes.push_back({i, f, {}, {}, {}, {}});

    const auto n = static_cast<long>(outcomes.size());
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < n; ++k) {
      auto& o = outcomes[k];
      const auto& s = samples[o.sample];
      const auto& model = folds[o.fold].result.model;
      o.answers = conclusions(s.trace);
      const auto bad = corruptKB(s.kb, level, mix(cfg.seed, li, o.sample));
      const auto x = encodeInput(bad.kb, data);
      o.predicted = flatten(predict(model, x.data));
      o.random = randomAnswers(s.kb.signature(), data.outputCapacity(), mix(cfg.seed ^ 0x5bd1e995ULL, o.sample));
      o.corrupted = conclusions(saturate(bad.kb));
    }
    auto rep = aggregate(level, outcomes, folds.size());
    res.report.rows.insert(res.report.rows.end(), rep.rows.begin(), rep.rows.end());
    res.outcomes.push_back(std::move(outcomes));
  }
  return res;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string renderReportCsv(const EvalReport& r) {
  std::ostringstream out;
  out << "level,metric,baseline,mean_dist,min_dist,max_dist,precision,recall,f1,fold_count\n";
  for (const auto& row : r.rows) {
    char lvl[16];
    std::snprintf(lvl, sizeof lvl, "%.1f", row.level);
    out << lvl << ',' << toString(row.metric) << ',' << toString(row.baseline) << ',' << num(row.meanDist) << ','
        << num(row.minDist) << ',' << num(row.maxDist) << ',' << num(row.precision) << ',' << num(row.recall)
        << ',' << num(row.f1) << ',' << row.foldCount << '\n';
  }
  return out.str();
}

void writeReportCsv(const std::string& path, const EvalReport& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write report '" + path + "'");
  out << renderReportCsv(r);
}

void writePlotData(const std::string& dir, const std::string& prefix, const EvalReport& r) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (auto m : kAllMetrics) {
    for (auto b : kAllBaselines) {
      const std::string tag = toString(m) + "_" + toString(b) + ".dat";
      std::ofstream dist(fs::path(dir) / (prefix + "dist_" + tag), std::ios::binary);
      std::ofstream f1(fs::path(dir) / (prefix + "f1_" + tag), std::ios::binary);
      if (!dist || !f1) throw Error("cannot write plot data in '" + dir + "'");
      for (const auto& row : r.rows) {
        if (row.metric != m || row.baseline != b) continue;
        dist << num(row.level) << ' ' << num(row.meanDist) << '\n';
        f1 << num(row.level) << ' ' << num(row.f1) << '\n';
      }
    }
  }
}

}  // namespace elnn
