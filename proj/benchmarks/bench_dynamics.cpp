#include <benchmark/benchmark.h>

#include <cmath>

#include "iondyne/dynamics.hpp"

using namespace iondyne;

static void BM_EvolveAnalytic(benchmark::State& state) {
  const DynamicsParams p(RatePair{80.0, 3300.0}, 0.206);
  double t = 1e-5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve_analytic(p, Spin::up, t));
    t += 1e-9;
  }
}
BENCHMARK(BM_EvolveAnalytic);

static void BM_PUpAnalytic(benchmark::State& state) {
  const DynamicsParams p(RatePair{80.0, 3300.0}, 0.206);
  double t = 1e-5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(p_up_analytic(p, Spin::down, t));
    t += 1e-9;
  }
}
BENCHMARK(BM_PUpAnalytic);

static void BM_EvolveNumeric(benchmark::State& state) {
  const DynamicsParams p(RatePair{80.0, 3300.0}, 0.206);
  const double tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(evolve_numeric(p, PopulationState::prepared(Spin::up), 1e-3, tol));
  }
}
BENCHMARK(BM_EvolveNumeric)->Arg(6)->Arg(9)->Arg(12);
