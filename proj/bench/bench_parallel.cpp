#include <benchmark/benchmark.h>

#include <algorithm>
#include <thread>

#include "sharpq/minimiser.hpp"
#include "sharpq/sweep.hpp"

using namespace sharpq;

namespace {

const ProblemParams kParams{3.0, 2.0};

void BM_GramSerial(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_basis_serial(kParams, K, 1.0));
}

void BM_GramParallel(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_basis(kParams, K, 1.0));
}

void BM_Restarts(benchmark::State& state) {
  const BasisModel m = build_basis(kParams, 12, 1.0);
  MinimiseOptions o;
  o.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(minimise_quotient(m, o));
}

void BM_Sweep(benchmark::State& state) {
  SweepConfig c;
  c.mu_grid = {1.0, 2.0, 3.0};
  c.eps_values = {0.0, 0.5};
  c.K = 8;
  c.parallelism = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(c));
}

int hardware_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

}  // namespace

BENCHMARK(BM_GramSerial)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramParallel)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Restarts)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep)->Arg(1)->Arg(hardware_threads())->ArgName("threads")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
