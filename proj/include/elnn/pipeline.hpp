#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "elnn/eval.hpp"
#include "elnn/ontosample.hpp"
#include "elnn/syngen.hpp"
#include "elnn/train.hpp"

namespace elnn {

/// Everything an experiment needs, read from an INI file. See docs/config.md.
struct ExperimentConfig {
  std::uint64_t seed = 42;

  // [generate]
  std::string mode = "synthetic";  // or "ontology"
  std::size_t count = 20;
  GenConfig gen = GenConfig::moderate(0);
  std::filesystem::path ontology;
  SampleConfig sample;

  // [run]
  std::filesystem::path kbDir;  // empty: generate into the run directory
  std::vector<Architecture> architectures{Architecture::Flat};
  TrainConfig train;
  std::vector<double> levels = SweepConfig{}.levels;

  static ExperimentConfig parse(std::istream& in, const std::filesystem::path& baseDir = {});
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Normalized `key = value` listing; equal configs render identically.
  std::string canonical() const;
  /// FNV-1a of canonical(), 16 hex digits.
  std::string hash() const;
};

/// A stage failed; carries the stage name for the error report.
class StageFailure : public Error {
public:
  StageFailure(std::string stage, const std::string& why)
      : Error("stage '" + stage + "' failed: " + why), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

private:
  std::string stage_;
};

struct GeneratedKB {
  std::string file;  // relative to the output directory
  std::uint64_t seed = 0;
  std::size_t traceLength = 0;
};

/// Writes kb_NNNN.kb files and manifest.tsv (`file  seed  trace_length`) into `outDir`.
std::vector<GeneratedKB> cmdGenerate(const ExperimentConfig& cfg, const std::filesystem::path& outDir);

/// Reads the KBs listed in a manifest, or every *.kb file in name order if there is none.
std::vector<std::pair<std::string, KnowledgeBase>> readKBDir(const std::filesystem::path& dir);

struct RunOutcome {
  std::filesystem::path runDir;
  std::vector<std::filesystem::path> reports;  // one per architecture
};

/// End-to-end experiment under `outRoot/run-<hash>`. Progress goes to `log` when non-null.
RunOutcome cmdRun(const ExperimentConfig& cfg, const std::filesystem::path& outRoot, std::ostream* log = nullptr);

struct InspectView {
  std::size_t step = 0;  // 1-based
  std::vector<Axiom> predicted;    // decoded support-layer output
  std::vector<Axiom> trueSupport;  // KB axioms supporting the step's conclusions
  std::size_t overlap = 0;
};

/// Support-layer view of a Deep or Piecewise checkpoint on one KB at one step.
InspectView cmdInspect(const std::filesystem::path& checkpoint, const std::filesystem::path& kbFile, std::size_t step);
std::string renderInspect(const InspectView& v);

/// Re-scores a predictions TSV against an answers TSV; returns the report.
EvalReport cmdEval(const std::filesystem::path& predictions, const std::filesystem::path& answers);

/// TSV writers and readers shared by run and eval.
void writePredictions(const std::filesystem::path& path, const std::vector<double>& levels,
                      const std::vector<std::vector<SampleOutcome>>& outcomes);
void writeAnswers(const std::filesystem::path& path, const std::vector<SampleOutcome>& outcomes);

}  // namespace elnn
