#include <benchmark/benchmark.h>

#include "iondyne/flip_fit.hpp"
#include "iondyne/simulator.hpp"
#include "iondyne/units.hpp"

using namespace iondyne;

namespace {
struct Scans {
  ShotDataset up, down;
  FlipModelParams truth;
};

Scans make_scans(std::size_t points) {
  const auto field =
      LaserField::from_weights(angular_from_ghz(-12.03), angular_from_mhz(450), 0.985, 0.015, 0);
  const auto decay = DecayConstants::from_gamma_and_branching(angular_from_mhz(21.57), 0.93572);
  const auto spam = SpamModel::with_sink(0.98, 0.02, SinkReadout::bright);
  const auto plan = [&](Initialization init) {
    return ScanPlan::arithmetic(points, 34e-6 * 30.0 / static_cast<double>(points), 0.0, 500, init, "red12");
  };
  Scans s{simulate_flip_scan(field, decay, spam, plan(Initialization::up), 1),
          simulate_flip_scan(field, decay, spam, plan(Initialization::down), 2), {}};
  const auto r = spin_flip_rates(field, decay.gamma_ps);
  s.truth = {r.r_plus, r.r_minus, decay.leak_b, spam};
  return s;
}
}  // namespace

static void BM_FlipLikelihood(benchmark::State& state) {
  const auto s = make_scans(static_cast<std::size_t>(state.range(0)));
  const FlipLikelihood like(s.up, s.down);
  for (auto _ : state) benchmark::DoNotOptimize(like(s.truth));
  state.SetItemsProcessed(state.iterations() * 2 * state.range(0));
}
BENCHMARK(BM_FlipLikelihood)->Arg(30)->Arg(120);

static void BM_FlipFit(benchmark::State& state) {
  const auto s = make_scans(30);
  McmcConfig mcmc;
  mcmc.burn_in = 2000;
  mcmc.draws_per_chain = 4000;
  for (auto _ : state) benchmark::DoNotOptimize(fit_flip_scan(s.up, s.down, FlipPrior{}, mcmc, 5));
}
BENCHMARK(BM_FlipFit)->Unit(benchmark::kMillisecond);
