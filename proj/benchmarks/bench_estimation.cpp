#include <benchmark/benchmark.h>

#include "graphon/aggregation.hpp"
#include "graphon/assignment_flow.hpp"
#include "graphon/estimation.hpp"
#include "graphon/rng.hpp"
#include "graphon/synthesis.hpp"

using namespace graphon;

namespace {

ObservationSet dataset(int n, std::uint64_t seed) {
  const Graphon g = make_standard_graphon(StandardGraphon::Rand, {.K = 8, .L = 8, .rho = 0.6, .seed = seed});
  return synthesize({.n = n,
                     .m = n / 2,
                     .graphon = g,
                     .noise = NoiseModel::bernoulli(),
                     .seed = seed,
                     .with_second_copy = false,
                     .missing_p = std::nullopt,
                     .regular_latents = false});
}

void BM_MinSizeAssignment(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int K = static_cast<int>(state.range(1));
  Rng rng(1);
  Matrix costs(n, K);
  for (Eigen::Index k = 0; k < costs.size(); ++k) costs.data()[k] = rng.uniform();
  // Bias every row towards cluster 0 so most of the size constraint is active.
  costs.col(0).array() -= 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(min_size_assignment(costs, n / K));
  state.SetComplexityN(n);
}
BENCHMARK(BM_MinSizeAssignment)->Args({256, 4})->Args({1024, 8})->Args({4096, 16})->Unit(benchmark::kMillisecond);

void BM_SpectralInit(benchmark::State& state) {
  const auto obs = dataset(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_init(obs.H, 8, 8, 3));
}
BENCHMARK(BM_SpectralInit)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_LloydFit(benchmark::State& state) {
  const auto obs = dataset(static_cast<int>(state.range(0)), 4);
  FitConfig config;
  config.K = 8;
  config.L = 8;
  config.n0 = static_cast<int>(state.range(1));
  config.m0 = static_cast<int>(state.range(1)) / 2;
  config.seed = 5;
  for (auto _ : state) benchmark::DoNotOptimize(lloyd_fit(obs.H, config));
}
BENCHMARK(BM_LloydFit)->Args({256, 0})->Args({512, 0})->Args({512, 40})->Args({1024, 0})->Unit(benchmark::kMillisecond);

void BM_FitAndAggregate(benchmark::State& state) {
  const Graphon g = make_standard_graphon(StandardGraphon::Cos, {.K = 4, .L = 4, .rho = 0.6, .seed = 0});
  const auto obs = synthesize({.n = 200,
                               .m = 100,
                               .graphon = g,
                               .noise = NoiseModel::bernoulli(),
                               .seed = 6,
                               .with_second_copy = true,
                               .missing_p = std::nullopt,
                               .regular_latents = false});
  const HyperGrid grid = default_grid(200, 100);
  EwaFitOptions options;
  options.seed = 6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_and_aggregate(obs.H, *obs.H_prime, grid, 8.0 / 3.0, options));
  }
  state.counters["grid"] = static_cast<double>(grid.size());
}
BENCHMARK(BM_FitAndAggregate)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
