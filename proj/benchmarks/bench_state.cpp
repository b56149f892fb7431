#include <benchmark/benchmark.h>

#include <random>

#include "qconserve/entanglement.hpp"
#include "qconserve/state.hpp"

using namespace qconserve;

static StateVector random_bipartite(std::size_t d) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  const SpaceLayout l({Factor::discrete("A", d), Factor::discrete("B", d)});
  ComplexVector v(static_cast<Eigen::Index>(d * d));
  for (auto& z : v) z = Complex(n(rng), n(rng));
  return StateVector(l, v).normalized();
}

static void BM_Schmidt(benchmark::State& state) {
  const auto psi = random_bipartite(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(schmidt(psi, Bipartition{1}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Schmidt)->RangeMultiplier(2)->Range(4, 128)->Complexity();

static void BM_PartialTrace(benchmark::State& state) {
  const auto psi = random_bipartite(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(partial_trace(psi, "A"));
}
BENCHMARK(BM_PartialTrace)->RangeMultiplier(2)->Range(4, 128);

static void BM_Disentangler(benchmark::State& state) {
  const auto psi = random_bipartite(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(disentangling_unitary(psi, Bipartition{1}));
}
BENCHMARK(BM_Disentangler)->RangeMultiplier(2)->Range(4, 32);

BENCHMARK_MAIN();
