#include <benchmark/benchmark.h>

#include "heatlab/scenario.hpp"
#include "heatlab/semigroup.hpp"
#include "heatlab/space.hpp"

using namespace heatlab;

static void BM_EngineConstruction(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DirichletSpace space = random_connected_space(1, n, 0.1);
  for (auto _ : state) {
    HeatEngine engine(space);
    benchmark::DoNotOptimize(engine.eigenvalues());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_EngineConstruction)->RangeMultiplier(2)->Range(32, 512)->Complexity();

static void BM_Apply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DirichletSpace space = random_connected_space(2, n, 0.1);
  HeatEngine engine(space);
  Vector f = Vector::Ones(n);
  for (auto _ : state) benchmark::DoNotOptimize(engine.apply(0.5, f));
  state.SetComplexityN(n);
}
BENCHMARK(BM_Apply)->RangeMultiplier(2)->Range(32, 1024)->Complexity();

static void BM_KernelMatrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DirichletSpace space = random_connected_space(3, n, 0.1);
  HeatEngine engine(space);
  for (auto _ : state) benchmark::DoNotOptimize(engine.kernel_matrix(0.5));
  state.SetComplexityN(n);
}
BENCHMARK(BM_KernelMatrix)->RangeMultiplier(2)->Range(32, 512)->Complexity();

static void BM_ExpmAction(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DirichletSpace space = random_connected_space(4, n, 0.0);  // tree: sparse action
  HeatEngine engine(space, /*dense_threshold=*/2);  // force the Taylor path
  Vector f = Vector::Ones(n);
  for (auto _ : state) benchmark::DoNotOptimize(engine.apply(0.5, f));
  state.SetComplexityN(n);
}
BENCHMARK(BM_ExpmAction)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

static void BM_RestrictedApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  DirichletSpace space = random_connected_space(5, n, 0.1);
  HeatEngine engine(space);
  std::vector<int> half;
  for (int x = 0; x < n / 2; ++x) half.push_back(x);
  Subdomain U(space, half);
  Vector f = Vector::Ones(n);
  engine.restricted_apply(U, 0.5, f);  // warm the cache
  for (auto _ : state) benchmark::DoNotOptimize(engine.restricted_apply(U, 0.5, f));
}
BENCHMARK(BM_RestrictedApply)->RangeMultiplier(2)->Range(32, 512);

BENCHMARK_MAIN();
