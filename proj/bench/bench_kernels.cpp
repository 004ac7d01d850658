// Streaming block elimination against the dense assembled reference, and the
// trial loop at 1 worker against the default worker budget.

#include <benchmark/benchmark.h>

#include "cokfluct/ensembles.hpp"
#include "cokfluct/experiments.hpp"
#include "cokfluct/padic.hpp"

using namespace cokfluct;

namespace {

EnsembleSpec block_spec(std::size_t k, std::size_t n) {
  EnsembleSpec spec;
  spec.kind = EnsembleKind::kBlockTriangular;
  spec.p = 2;
  spec.k = k;
  spec.n = n;
  spec.master_seed = 7;
  return spec;
}

void BM_StreamingEliminate(benchmark::State& state) {
  const auto spec = block_spec(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const auto layout = sample_block_layout(spec, 0, spec.starting_precision());
  for (auto _ : state) benchmark::DoNotOptimize(streaming_block_eliminate(layout));
}

void BM_DenseEliminate(benchmark::State& state) {
  const auto spec = block_spec(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const auto layout = sample_block_layout(spec, 0, spec.starting_precision());
  for (auto _ : state) benchmark::DoNotOptimize(padic_valuations(layout.assemble()));
}

void BM_ProductTrial(benchmark::State& state) {
  EnsembleSpec spec;
  spec.kind = EnsembleKind::kMatrixProduct;
  spec.p = 2;
  spec.k = static_cast<std::size_t>(state.range(0));
  spec.n = static_cast<std::size_t>(state.range(1));
  spec.master_seed = 7;
  std::uint64_t t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(spec, t++));
}

void BM_Experiment(benchmark::State& state) {
  const auto spec = block_spec(8, 8);
  ExperimentOptions options;
  options.workers = static_cast<int>(state.range(0));
  options.bootstrap_resamples = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(spec, 200, {Partition{1}}, {Partition{1}}, 1, options));
  state.counters["workers"] = effective_workers(options.workers);
}

}  // namespace

BENCHMARK(BM_StreamingEliminate)->Args({4, 8})->Args({16, 12})->Args({32, 12})->Args({64, 8})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DenseEliminate)->Args({4, 8})->Args({16, 12})->Args({32, 12})->Args({64, 8})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProductTrial)->Args({16, 24})->Args({64, 20})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Experiment)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
