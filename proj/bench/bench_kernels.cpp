// Serial reference against the OpenMP kernels.
//
// Thread-count arguments are passed to omp_set_num_threads; 0 means the
// OpenMP default. Compare e.g. BM_GradSerial with BM_GradBatched/<threads>.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <numeric>

#include "elnn/encode.hpp"
#include "elnn/eval.hpp"
#include "elnn/kernels.hpp"
#include "elnn/reasoner.hpp"
#include "elnn/syngen.hpp"

using namespace elnn;

namespace {

struct Fixture {
  std::vector<KnowledgeBase> kbs;
  std::vector<Sample> samples;
  DatasetTensors data;
  Model flat, deep;
  std::vector<std::size_t> all;
  std::vector<SampleOutcome> outcomes;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.kbs = generateBatch(GenConfig::moderate(1), 20);
    x.samples = prepareSamples(x.kbs);
    x.data = buildDataset(x.samples);
    x.flat = Model::create(Architecture::Flat, dimsOf(x.data), x.data.signature, 1);
    x.deep = Model::create(Architecture::Deep, dimsOf(x.data), x.data.signature, 1);
    x.all.resize(x.data.X.samples);
    std::iota(x.all.begin(), x.all.end(), std::size_t{0});
    // Scoring workload: the reasoner's own answers scored against random guesses.
    for (std::size_t i = 0; i < x.samples.size(); ++i) {
      SampleOutcome o;
      o.sample = i;
      o.fold = i % 5;
      for (const auto& step : x.samples[i].trace.steps)
        for (const auto& d : step) o.answers.push_back(d.conclusion);
      o.predicted = randomAnswers(x.kbs[i].signature(), o.answers.size(), i);
      o.random = randomAnswers(x.kbs[i].signature(), x.data.outputCapacity(), i + 1000);
      o.corrupted = o.answers;
      x.outcomes.push_back(std::move(o));
    }
    return x;
  }();
  return f;
}

void threads(const benchmark::State& s) {
  omp_set_num_threads(s.range(0) > 0 ? static_cast<int>(s.range(0)) : omp_get_num_procs());
}

const Model& modelFor(int which) { return which ? fixture().deep : fixture().flat; }

void BM_GradSerial(benchmark::State& s) {
  const auto& f = fixture();
  const auto& m = modelFor(static_cast<int>(s.range(0)));
  std::vector<double> g(m.paramCount(0, m.stages.size()));
  for (auto _ : s)
    benchmark::DoNotOptimize(lossAndGradientSerial(m, 0, m.stages.size(), f.data.X, f.data.Y, f.all, g));
}
BENCHMARK(BM_GradSerial)->ArgName("deep")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GradBatched(benchmark::State& s) {
  const auto& f = fixture();
  const auto& m = modelFor(static_cast<int>(s.range(1)));
  threads(s);
  std::vector<double> g(m.paramCount(0, m.stages.size()));
  for (auto _ : s) benchmark::DoNotOptimize(lossAndGradient(m, 0, m.stages.size(), f.data.X, f.data.Y, f.all, g));
}
BENCHMARK(BM_GradBatched)
    ->ArgNames({"threads", "deep"})
    ->ArgsProduct({{1, 0}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

void BM_SaturateSerial(benchmark::State& s) {
  const auto& f = fixture();
  for (auto _ : s) benchmark::DoNotOptimize(saturateAllSerial(f.kbs));
}
BENCHMARK(BM_SaturateSerial)->Unit(benchmark::kMillisecond);

void BM_SaturateParallel(benchmark::State& s) {
  const auto& f = fixture();
  threads(s);
  for (auto _ : s) benchmark::DoNotOptimize(saturateAll(f.kbs));
}
BENCHMARK(BM_SaturateParallel)->ArgName("threads")->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

// aggregate() scores samples in an OpenMP loop; one thread is its serial form.
void BM_Score(benchmark::State& s) {
  const auto& f = fixture();
  threads(s);
  for (auto _ : s) benchmark::DoNotOptimize(aggregate(0.0, f.outcomes, 5));
}
BENCHMARK(BM_Score)->ArgName("threads")->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
