#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "iondyne/error.hpp"
#include "iondyne/flip_fit.hpp"
#include "iondyne/units.hpp"

using namespace iondyne;

namespace {
const double kGamma = angular_from_mhz(21.57);
const DecayConstants kTruth = DecayConstants::from_gamma_and_branching(kGamma, 0.93572);
const SpamModel kSpam = SpamModel::with_sink(0.98, 0.02, SinkReadout::bright);

ScanPlan plan(Initialization init, long shots = 500, std::string label = "red12") {
  return ScanPlan::arithmetic(30, 34e-6, 0.0, shots, init, std::move(label));
}

McmcConfig quick() {
  McmcConfig c;
  c.burn_in = 2000;
  c.draws_per_chain = 4000;
  return c;
}

std::pair<ShotDataset, ShotDataset> scans(const LaserField& f, std::uint64_t seed, long shots = 500) {
  return {simulate_flip_scan(f, kTruth, kSpam, plan(Initialization::up, shots), seed),
          simulate_flip_scan(f, kTruth, kSpam, plan(Initialization::down, shots), seed + 7919)};
}
}  // namespace

TEST_CASE("likelihood input checks") {
  const auto f = LaserField::from_weights(angular_from_ghz(-12.03), angular_from_mhz(450), 0.985, 0.015, 0);
  auto [up, down] = scans(f, 1);
  SUBCASE("accepts matching scans") { CHECK_NOTHROW(FlipLikelihood(up, down)); }
  SUBCASE("grids must match") {
    down.rows.pop_back();
    CHECK_THROWS_AS(FlipLikelihood(up, down), InputError);
  }
  SUBCASE("labels must match") {
    down.metadata.detuning_label = "blue11";
    CHECK_THROWS_AS(FlipLikelihood(up, down), InputError);
  }
  SUBCASE("initializations must be up then down") {
    CHECK_THROWS_AS(FlipLikelihood(down, up), InputError);
  }
}

TEST_CASE("log-likelihood equals the binomial sum written out") {
  const auto f = LaserField::from_weights(angular_from_ghz(-12.03), angular_from_mhz(450), 0.985, 0.015, 0);
  const auto [up, down] = scans(f, 3, 50);
  const FlipLikelihood like(up, down);
  FlipModelParams p;
  const auto rates = spin_flip_rates(f, kGamma);
  p.r_plus = rates.r_plus;
  p.r_minus = rates.r_minus;
  p.leak_b = kTruth.leak_b;
  p.spam = kSpam;

  double expected = 0.0;
  const DynamicsParams dyn(rates, kTruth.leak_b);
  for (const auto* d : {&up, &down}) {
    for (const auto& row : d->rows) {
      const Spin s = row.initialization == Initialization::up ? Spin::up : Spin::down;
      const double q = kSpam.dark_probability(evolve_analytic(dyn, s, row.duration));
      const double k = static_cast<double>(row.dark_count);
      const double n = static_cast<double>(row.shots);
      expected += std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1) +
                  k * std::log(q) + (n - k) * std::log1p(-q);
    }
  }
  CHECK(like(p) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("coordinates map onto model parameters") {
  const double x[] = {std::log(100.0), std::log(5.0), 0.2, 0.97, 0.03};
  const auto p = flip_params_from_coordinates(x, SinkReadout::dark);
  CHECK(p.r_plus == doctest::Approx(100.0));
  CHECK(p.r_minus == doctest::Approx(5.0));
  CHECK(p.spam.dark_given_sink == 0.97);
  FlipPrior prior;
  const auto f = LaserField::from_weights(angular_from_ghz(-12.03), angular_from_mhz(450), 0.985, 0.015, 0);
  const auto [up, down] = scans(f, 1);
  const FlipLikelihood like(up, down);
  const double outside_b[] = {std::log(100.0), std::log(5.0), 2.5, 0.97, 0.03};
  CHECK(std::isinf(flip_log_posterior(like, prior, outside_b)));
  const double swapped_spam[] = {std::log(100.0), std::log(5.0), 0.2, 0.03, 0.97};
  CHECK(std::isinf(flip_log_posterior(like, prior, swapped_spam)));
  const double too_fast[] = {std::log(2e6), std::log(5.0), 0.2, 0.97, 0.03};
  CHECK(std::isinf(flip_log_posterior(like, prior, too_fast)));
}

TEST_CASE("recovers the rates of a simulated scan") {
  const auto f = LaserField::from_weights(angular_from_ghz(-12.03), angular_from_mhz(450), 0.985, 0.015, 0);
  const auto rates = spin_flip_rates(f, kGamma);
  const auto [up, down] = scans(f, 42, 2500);
  const auto est = fit_flip_scan(up, down, FlipPrior{}, quick(), 5);
  CHECK(est.converged);
  for (const char* name : {"r_plus", "r_minus", "leak_b", "dark_given_up", "dark_given_down", "delta_r"}) {
    CHECK(est.has(name));
    CHECK(est.at(name).rhat < 1.05);
  }
  const auto& dr = est.at("delta_r");
  CHECK(std::abs(dr.median - rates.delta()) < 3.0 * dr.sigma());
  CHECK(std::abs(est.at("leak_b").median - kTruth.leak_b) < 3.0 * est.at("leak_b").sigma());
  CHECK(dr.sigma() / std::abs(dr.median) < 0.03);
}

TEST_CASE("equal rates give a difference centred on zero") {
  const auto f = LaserField::from_weights(angular_from_ghz(-12.03), angular_from_mhz(450), 0.5, 0.5, 0);
  const auto [up, down] = scans(f, 8, 1000);
  const auto est = fit_flip_scan(up, down, FlipPrior{}, quick(), 2);
  const auto& dr = est.at("delta_r");
  CHECK(std::abs(dr.median) < 2.0 * dr.sigma());
}

TEST_CASE("posterior summaries ignore row order and chain split") {
  const auto f = LaserField::from_weights(angular_from_ghz(11.52), angular_from_mhz(450), 0.985, 0.015, 0);
  auto [up, down] = scans(f, 17, 1000);
  McmcConfig c = quick();
  c.draws_per_chain = 10000;
  const auto base = fit_flip_scan(up, down, FlipPrior{}, c, 4);

  std::reverse(up.rows.begin(), up.rows.end());
  std::reverse(down.rows.begin(), down.rows.end());
  const auto reordered = fit_flip_scan(up, down, FlipPrior{}, c, 4);

  McmcConfig more_chains = c;
  more_chains.chains = 8;
  more_chains.draws_per_chain = 5000;
  const auto split = fit_flip_scan(up, down, FlipPrior{}, more_chains, 4);

  for (const char* name : {"delta_r", "leak_b", "r_plus"}) {
    const double sd = base.at(name).sigma();
    CHECK(std::abs(reordered.at(name).median - base.at(name).median) < 0.2 * sd);
    CHECK(std::abs(split.at(name).median - base.at(name).median) < 0.2 * sd);
  }
}

TEST_CASE("fits are reproducible") {
  const auto f = LaserField::from_weights(angular_from_ghz(-12.03), angular_from_mhz(450), 0.985, 0.015, 0);
  const auto [up, down] = scans(f, 9);
  McmcConfig c = quick();
  const auto a = fit_flip_scan(up, down, FlipPrior{}, c, 77);
  c.threads = 4;
  const auto b = fit_flip_scan(up, down, FlipPrior{}, c, 77);
  CHECK(a.at("delta_r").median == b.at("delta_r").median);
  CHECK(a.at("delta_r").ci68_lo == b.at("delta_r").ci68_lo);
}
