// Threaded kernels against their serial references.

#include <benchmark/benchmark.h>

#include <cmath>

#include "shearsep/noise.hpp"
#include "shearsep/parallel.hpp"

using namespace shearsep;

namespace {

const noise::NoisePath& path(std::size_t n) {
  static const noise::NoisePath p = noise::sample_brownian(7, 0.0, 1.0 / 4096, 1 << 14);
  static const noise::NoisePath q = noise::sample_brownian(7, 0.0, 1.0 / 1024, 1 << 12);
  return n == p.size() ? p : q;
}

void BM_HolderThreaded(benchmark::State& state) {
  const noise::NoisePath& W = path(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(noise::holder_seminorm(W, 0.4));
}

void BM_HolderSerial(benchmark::State& state) {
  const noise::NoisePath& W = path(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(noise::holder_seminorm_serial(W, 0.4));
}

double trial(std::int64_t i) {
  double s = 0.0;
  for (int k = 0; k < 2000; ++k) s += std::sin(1e-3 * static_cast<double>(i * k));
  return s;
}

void BM_MapTrialsThreaded(benchmark::State& state) {
  const int threads = parallel::resolve_threads();
  for (auto _ : state) benchmark::DoNotOptimize(parallel::map_trials<double>(state.range(0), threads, trial));
}

void BM_MapTrialsSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(parallel::map_trials_serial<double>(state.range(0), trial));
}

}  // namespace

BENCHMARK(BM_HolderThreaded)->Arg(1 << 12)->Arg(1 << 14)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HolderSerial)->Arg(1 << 12)->Arg(1 << 14)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MapTrialsThreaded)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MapTrialsSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
