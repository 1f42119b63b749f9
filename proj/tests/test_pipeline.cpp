#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "elnn/pipeline.hpp"
#include "elnn/reasoner.hpp"

using namespace elnn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig parseText(const std::string& text, const fs::path& base = {}) {
  std::istringstream in(text);
  return ExperimentConfig::parse(in, base);
}

const char* kTiny =
    "[general]\nseed = 5\n"
    "[generate]\ncount = 6\niterations = 1\nrandom_axioms = 4\nrandom_concepts = 4\nrandom_roles = 2\n"
    "[run]\narchitectures = flat, deep, piecewise\nepochs = 30\npiecewise_epochs = 15\nlearning_rate = 0.001\n"
    "folds = 2\nlevels = 0.0, 0.5\n";

class TempDir : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("elnn_pipeline_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST(Config, Defaults) {
  const auto c = parseText("");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.train.epochs, 20000u);
  EXPECT_EQ(c.train.piecewiseEpochs, 10000u);
  EXPECT_EQ(c.train.learningRate, 1e-4);
  EXPECT_EQ(c.train.folds, 10u);
  EXPECT_EQ(c.levels.size(), 10u);
  EXPECT_EQ(c.gen.iterations, 4u);
  EXPECT_EQ(c.gen.randomAxioms, 2 * structuredCount(4));
}

TEST(Config, Parses) {
  const auto c = parseText(kTiny);
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.count, 6u);
  EXPECT_EQ(c.architectures.size(), 3u);
  EXPECT_EQ(c.levels, (std::vector<double>{0.0, 0.5}));
  EXPECT_EQ(c.train.folds, 2u);
}

TEST(Config, Errors) {
  EXPECT_THROW(parseText("[run]\nepochz = 3\n"), ConfigError);
  EXPECT_THROW(parseText("[bogus]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parseText("[run]\nepochs = many\n"), ConfigError);
  EXPECT_THROW(parseText("[run]\nfolds = 1\n"), ConfigError);
  EXPECT_THROW(parseText("[run]\nlevels = 0.1, 1.5\n"), ConfigError);
  EXPECT_THROW(parseText("[run]\narchitectures = wide\n"), ConfigError);
  EXPECT_THROW(parseText("[run]\noptimizer = rmsprop\n"), ConfigError);
  EXPECT_THROW(parseText("[generate]\nmode = magic\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::load("/nonexistent.ini"), ConfigError);
}

TEST(Config, CanonicalAndHash) {
  const auto a = parseText(kTiny);
  const auto b = parseText(std::string(kTiny) + "\n# comment\n");
  EXPECT_EQ(a.canonical(), b.canonical());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  EXPECT_EQ(parseText(a.canonical()).canonical(), a.canonical());
  auto c = a;
  c.seed = 6;
  EXPECT_NE(c.hash(), a.hash());
}

TEST_F(TempDir, GenerateDeterministic) {
  const auto cfg = parseText(kTiny);
  const auto a = cmdGenerate(cfg, dir_ / "a");
  const auto b = cmdGenerate(cfg, dir_ / "b");
  ASSERT_EQ(a.size(), 6u);
  for (const auto& g : a) {
    EXPECT_EQ(slurp(dir_ / "a" / g.file), slurp(dir_ / "b" / g.file));
    EXPECT_GE(g.traceLength, 1u);
  }
  EXPECT_EQ(slurp(dir_ / "a" / "manifest.tsv"), slurp(dir_ / "b" / "manifest.tsv"));
  EXPECT_EQ(readKBDir(dir_ / "a").size(), 6u);
}

TEST_F(TempDir, GenerateFromOntology) {
  GenConfig g;
  g.iterations = 6;
  g.randomAxioms = 150;
  g.seed = 3;
  writeKBFile((dir_ / "onto.kb").string(), generate(g));
  const auto cfg = parseText(
      "[generate]\nmode = ontology\nontology = onto.kb\ncount = 4\nsample_size = 20\nmin_steps = 3\n", dir_);
  const auto out = cmdGenerate(cfg, dir_ / "kbs");
  ASSERT_EQ(out.size(), 4u);
  for (const auto& k : out) {
    EXPECT_GE(k.traceLength, 3u);
    EXPECT_GE(saturate(readKBFile((dir_ / "kbs" / k.file).string())).length(), 3u);
  }
}

TEST_F(TempDir, RunReproducibleAndRescorable) {
  const auto cfg = parseText(kTiny);
  const auto r1 = cmdRun(cfg, dir_ / "one");
  const auto r2 = cmdRun(cfg, dir_ / "two");
  ASSERT_EQ(r1.reports.size(), 3u);
  EXPECT_EQ(r1.runDir.filename(), "run-" + cfg.hash());
  for (std::size_t i = 0; i < 3; ++i) {
    const auto rel = fs::relative(r1.reports[i], r1.runDir);
    EXPECT_EQ(slurp(r1.reports[i]), slurp(r2.runDir / rel)) << rel;
  }
  for (const char* f : {"config.ini", "dataset.bin", "dataset_index.tsv", "answers.tsv", "summary.json",
                        "checkpoints/flat_fold0.ckpt", "loss_flat_fold1.csv", "predictions_deep.tsv",
                        "plots/piecewise_dist_predicate_random.dat"}) {
    EXPECT_TRUE(fs::exists(r1.runDir / f)) << f;
    EXPECT_EQ(slurp(r1.runDir / f), slurp(r2.runDir / f)) << f;
  }
  // The stored config reproduces the same run directory name.
  EXPECT_EQ(ExperimentConfig::load(r1.runDir / "config.ini").hash(), cfg.hash());

  // Re-scoring the stored predictions reproduces the report.
  const auto rep = cmdEval(r1.runDir / "predictions_flat.tsv", r1.runDir / "answers.tsv");
  EXPECT_EQ(renderReportCsv(rep), slurp(r1.runDir / "report_flat.csv"));
  EXPECT_EQ(rep.rows.size(), 2u * 9);

  // Inspect: deep checkpoint works, flat is refused, a step past the trace shows nothing true.
  const auto kb = r1.runDir / "kbs" / "kb_0000.kb";
  const auto v = cmdInspect(r1.runDir / "checkpoints" / "deep_fold0.ckpt", kb, 1);
  EXPECT_FALSE(v.trueSupport.empty());
  EXPECT_LE(v.overlap, v.trueSupport.size());
  EXPECT_FALSE(renderInspect(v).empty());
  EXPECT_THROW(cmdInspect(r1.runDir / "checkpoints" / "flat_fold0.ckpt", kb, 1), Error);
  const auto far = cmdInspect(r1.runDir / "checkpoints" / "piecewise_fold1.ckpt", kb, 99);
  EXPECT_TRUE(far.predicted.empty());
  EXPECT_TRUE(far.trueSupport.empty());
}

TEST_F(TempDir, StageFailureNamesStage) {
  const auto cfg = parseText("[run]\nkb_dir = missing\n", dir_);
  try {
    cmdRun(cfg, dir_ / "out");
    FAIL();
  } catch (const StageFailure& e) {
    EXPECT_FALSE(e.stage().empty());
  }
}
