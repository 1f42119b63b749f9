#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "elnn/encode.hpp"
#include "elnn/train.hpp"

namespace elnn {

enum class Metric { Character, Atomic, Predicate };
enum class Baseline { Reasoner, Random, Corrupted };

inline constexpr Metric kAllMetrics[] = {Metric::Character, Metric::Atomic, Metric::Predicate};
inline constexpr Baseline kAllBaselines[] = {Baseline::Reasoner, Baseline::Random, Baseline::Corrupted};

std::string toString(Metric m);
std::string toString(Baseline b);
Metric parseMetric(const std::string& s);

/// Levenshtein distance with unit costs.
std::size_t charDistance(std::string_view a, std::string_view b);

/// Every distinct number of two or more digits is replaced, consistently across
/// both strings, by one symbol occurring in neither; then charDistance.
std::size_t atomicDistance(std::string_view a, std::string_view b);

/// Slot-wise over the 4-tuple layout: equal names cost 0, same kind |i - j|,
/// different kinds i + j. Padding counts as index 0 of the other slot's kind.
std::size_t predicateDistance(const Axiom& guess, const Axiom& actual);
/// Parses both strings first; throws ParseError if either is not a normal-form axiom.
std::size_t predicateDistance(std::string_view guess, std::string_view actual);

std::size_t distance(Metric m, const Axiom& a, const Axiom& b);

struct MatchScore {
  std::vector<std::size_t> distances;  // per distinct prediction, to its best answer
  std::size_t truePositives = 0;
  std::size_t predictions = 0;  // distinct
  std::size_t answers = 0;      // distinct
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  bool precisionUndefined = false;  // no predictions
  bool recallUndefined = false;     // no answers
};

/// Duplicates are dropped from both lists first. Undefined ratios are reported as 0.
MatchScore bestMatchScore(std::span<const Axiom> predictions, std::span<const Axiom> answers, Metric metric);

double f1Score(double precision, double recall);

struct Corruption {
  KnowledgeBase kb;
  std::vector<std::size_t> corrupted;  // positions in the input KB
};

/// Each axiom is picked independently with probability p; all its names are
/// redrawn uniformly from the same kind in the signature, keeping the form.
/// Redraws avoid reflexive statements and collisions with the rest of the KB.
Corruption corruptKB(const KnowledgeBase& kb, double p, std::uint64_t seed);

/// `count` uniformly random Sub / SubEx statements over `sig`, never reflexive.
std::vector<Axiom> randomAnswers(const Signature& sig, std::size_t count, std::uint64_t seed);

/// Running totals for one metric and baseline; merged in a fixed order.
struct Pooled {
  double sumDist = 0.0;
  std::size_t count = 0;
  std::size_t minDist = 0, maxDist = 0;
  std::size_t truePositives = 0, predictions = 0, answers = 0;

  void add(const MatchScore& s);
  void merge(const Pooled& o);
  double meanDist() const;
  double precision() const;
  double recall() const;
};

struct ReportRow {
  double level = 0.0;
  Metric metric = Metric::Character;
  Baseline baseline = Baseline::Reasoner;
  double meanDist = 0.0, minDist = 0.0, maxDist = 0.0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  std::size_t foldCount = 0;  // folds with at least one scored prediction
};

struct EvalReport {
  std::vector<ReportRow> rows;
  const ReportRow& at(double level, Metric m, Baseline b) const;
};

/// What one test sample produced at one corruption level.
struct SampleOutcome {
  std::size_t sample = 0;
  std::size_t fold = 0;
  std::vector<Axiom> answers;     // correct completion of the clean KB
  std::vector<Axiom> predicted;   // network on the corrupted KB
  std::vector<Axiom> random;
  std::vector<Axiom> corrupted;   // reasoner on the corrupted KB
};

struct SweepConfig {
  std::vector<double> levels{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::uint64_t seed = 0;
};

struct SweepResult {
  EvalReport report;
  std::vector<std::vector<SampleOutcome>> outcomes;  // per level
};

/// Scores held-out samples of every fold at every level against the clean
/// completions; per-fold pooled statistics are averaged over folds.
SweepResult runSweep(std::span<const Sample> samples, const DatasetTensors& data, std::span<const FoldResult> folds,
                     const SweepConfig& cfg);

/// Per-fold pooling and fold averaging of already computed outcomes.
EvalReport aggregate(double level, std::span<const SampleOutcome> outcomes, std::size_t folds);

/// Header `level,metric,baseline,mean_dist,min_dist,max_dist,precision,recall,f1,fold_count`.
void writeReportCsv(const std::string& path, const EvalReport& r);
std::string renderReportCsv(const EvalReport& r);

/// One `x y` file per curve in `dir`: dist_<metric>_<baseline>.dat and f1_<metric>_<baseline>.dat.
void writePlotData(const std::string& dir, const std::string& prefix, const EvalReport& r);

}  // namespace elnn
