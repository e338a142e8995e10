#include <benchmark/benchmark.h>

#include <random>

#include "fairrep/ipm.hpp"
#include "fairrep/theory.hpp"

using namespace fairrep;

namespace {

GroupedBatch make_batch(std::size_t n, std::size_t m) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  GroupedBatch b{Matrix(n, m), Matrix(n, m)};
  for (auto& v : b.z0.values()) v = g(rng);
  for (auto& v : b.z1.values()) v = g(rng) + 0.4;
  return b;
}

GridSpec grid(std::size_t points) {
  GridSpec g;
  g.theta_points = g.mu_points = points;
  return g;
}

template <bool Parallel>
void BM_GridOracle(benchmark::State& state) {
  const GroupedBatch b = make_batch(32, static_cast<std::size_t>(state.range(0)));
  const GridSpec g = grid(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? grid_oracle_sipm(b, g) : serial::grid_oracle_sipm(b, g));
  }
}

template <bool Parallel>
void BM_EstimateSipm(benchmark::State& state) {
  const GroupedBatch b = make_batch(static_cast<std::size_t>(state.range(0)), 8);
  const SipmOptions o;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? estimate_sipm(b, o) : serial::estimate_sipm(b, o));
  }
}

template <bool Parallel>
void BM_ProjectedCdf(benchmark::State& state) {
  const GroupedBatch b = make_batch(static_cast<std::size_t>(state.range(0)), 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? projected_cdf_gap(b, 256, 64, 0) : serial::projected_cdf_gap(b, 256, 64, 0));
  }
}

}  // namespace

BENCHMARK(BM_GridOracle<false>)->Args({1, 801})->Args({2, 161})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridOracle<true>)->Args({1, 801})->Args({2, 161})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateSipm<false>)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateSipm<true>)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectedCdf<false>)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectedCdf<true>)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
