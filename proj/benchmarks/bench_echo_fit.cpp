#include <benchmark/benchmark.h>

#include "iondyne/echo_fit.hpp"
#include "iondyne/simulator.hpp"
#include "iondyne/units.hpp"

using namespace iondyne;

static void BM_EchoFit(benchmark::State& state) {
  const auto points = static_cast<std::size_t>(state.range(0));
  EchoSignalParams signal;
  signal.contrast = 0.45;
  signal.offset = 0.5;
  const auto plan = ScanPlan::arithmetic(points, 120e-9, 0.0, 100, Initialization::echo, "red12");
  const auto data = simulate_echo_scan(8.549e6, signal, plan, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fit_echo_scan(data));
}
BENCHMARK(BM_EchoFit)->Arg(120)->Arg(250)->Unit(benchmark::kMicrosecond);
