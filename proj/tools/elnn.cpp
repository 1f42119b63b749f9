// elnn: generate KBs, run the train/evaluate pipeline, inspect support layers, re-score predictions.

#include <iostream>

#include <CLI11.hpp>
#include <omp.h>

#include "elnn/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kConfigError = 1, kStageFailure = 2 };

elnn::ExperimentConfig loadConfig(const std::string& path, const std::optional<std::uint64_t>& seed) {
  auto cfg = path.empty() ? elnn::ExperimentConfig{} : elnn::ExperimentConfig::load(path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EL+ completion reasoning and LSTM sequence learning"};
  app.require_subcommand(1);

  std::string configPath, genOut = "kbs", runOut = "runs", evalOut;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0: OpenMP default)")->check(CLI::NonNegativeNumber);

  auto* gen = app.add_subcommand("generate", "Write a batch of KB files and a manifest");
  gen->add_option("--config", configPath, "Experiment config (INI)")->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "Override [general] seed");
  gen->add_option("--out", genOut, "Output directory")->capture_default_str();

  auto* run = app.add_subcommand("run", "Saturate, encode, cross-validate and sweep corruption levels");
  run->add_option("--config", configPath, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override [general] seed");
  run->add_option("--out", runOut, "Root for run directories")->capture_default_str();

  std::string checkpoint, kbFile;
  std::size_t step = 1;
  auto* inspect = app.add_subcommand("inspect", "Decode the support layer of a deep or piecewise model");
  inspect->add_option("--checkpoint", checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  inspect->add_option("--kb", kbFile, "KB file")->required()->check(CLI::ExistingFile);
  inspect->add_option("--step", step, "Reasoning step, from 1")->default_val(1);

  std::string predictions, answers;
  auto* eval = app.add_subcommand("eval", "Re-score a predictions TSV against an answers TSV");
  eval->add_option("--predictions", predictions, "predictions_<arch>.tsv")->required()->check(CLI::ExistingFile);
  eval->add_option("--answers", answers, "answers.tsv")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", evalOut, "Report CSV path (default: stdout)");

  // The shared flags are accepted before or after the subcommand.
  for (auto* sub : {gen, run, inspect, eval}) sub->add_option("--threads", threads)->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; bad arguments count as a config error.
    return app.exit(e) == 0 ? kOk : kConfigError;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*gen) {
      const auto cfg = loadConfig(configPath, seed);
      const auto kbs = elnn::cmdGenerate(cfg, genOut);
      std::cout << "wrote " << kbs.size() << " KBs to " << genOut << "\n";
    } else if (*run) {
      const auto cfg = loadConfig(configPath, seed);
      const auto r = elnn::cmdRun(cfg, runOut, &std::cerr);
      for (const auto& p : r.reports) std::cout << p.string() << "\n";
    } else if (*inspect) {
      std::cout << elnn::renderInspect(elnn::cmdInspect(checkpoint, kbFile, step));
    } else if (*eval) {
      const auto rep = elnn::cmdEval(predictions, answers);
      if (evalOut.empty())
        std::cout << elnn::renderReportCsv(rep);
      else
        elnn::writeReportCsv(evalOut, rep);
    }
  } catch (const elnn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kStageFailure;
  }
  return kOk;
}
