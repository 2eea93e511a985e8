#include <doctest.h>

#include <cmath>
#include <limits>

#include "iondyne/error.hpp"
#include "iondyne/mcmc.hpp"
#include "iondyne/rng.hpp"

using namespace iondyne;

namespace {
// Correlated 2-D Gaussian, mean (1, -2), sd (0.5, 3), rho 0.8.
double gaussian(std::span<const double> x) {
  const double a = (x[0] - 1.0) / 0.5;
  const double b = (x[1] + 2.0) / 3.0;
  const double rho = 0.8;
  return -0.5 * (a * a - 2 * rho * a * b + b * b) / (1 - rho * rho);
}

std::vector<Eigen::VectorXd> starts(int n) {
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < n; ++i) out.push_back(Eigen::Vector2d(0.5 * i, -1.0 * i));
  return out;
}
}  // namespace

TEST_CASE("samples a correlated Gaussian") {
  McmcConfig config;
  config.burn_in = 3000;
  config.draws_per_chain = 20000;
  const auto chains =
      run_adaptive_metropolis(gaussian, starts(4), Eigen::Matrix2d::Identity(), config, 3);
  std::vector<Eigen::MatrixXd> draws;
  for (const auto& c : chains) {
    draws.push_back(c.draws);
    CHECK(c.acceptance_rate > 0.15);
    CHECK(c.acceptance_rate < 0.45);
  }
  const auto post = summarize_chains(draws, {"x", "y"}, 1.05);
  CHECK(post.converged);
  CHECK(post.at("x").median == doctest::Approx(1.0).epsilon(0.05));
  CHECK(post.at("y").median == doctest::Approx(-2.0).epsilon(0.1));
  CHECK(post.at("x").sigma() == doctest::Approx(0.5).epsilon(0.05));
  CHECK(post.at("y").sigma() == doctest::Approx(3.0).epsilon(0.05));
  CHECK(post.samples.rows() == 4 * 20000);
  CHECK(post.at("x").ci68_lo <= post.at("x").median);
  CHECK(post.at("x").median <= post.at("x").ci68_hi);
  CHECK_THROWS_AS((void)post.at("z"), InputError);
}

TEST_CASE("results depend only on the seed, not on threads") {
  McmcConfig config;
  config.burn_in = 500;
  config.draws_per_chain = 1000;
  config.chains = 3;
  const auto a = run_adaptive_metropolis(gaussian, starts(3), Eigen::Matrix2d::Identity(), config, 9);
  config.threads = 3;
  const auto b = run_adaptive_metropolis(gaussian, starts(3), Eigen::Matrix2d::Identity(), config, 9);
  for (std::size_t c = 0; c < a.size(); ++c) CHECK(a[c].draws == b[c].draws);
  const auto d = run_adaptive_metropolis(gaussian, starts(3), Eigen::Matrix2d::Identity(), config, 10);
  CHECK(a[0].draws != d[0].draws);
}

TEST_CASE("support boundaries are respected") {
  auto half = [](std::span<const double> x) {
    return x[0] < 0.0 ? -std::numeric_limits<double>::infinity() : -x[0];
  };
  McmcConfig config;
  config.burn_in = 1000;
  config.draws_per_chain = 5000;
  config.chains = 2;
  std::vector<Eigen::VectorXd> s{Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 2.0)};
  const auto chains = run_adaptive_metropolis(half, s, Eigen::MatrixXd::Identity(1, 1), config, 1);
  for (const auto& c : chains) CHECK(c.draws.minCoeff() >= 0.0);
}

TEST_CASE("split R-hat") {
  std::vector<std::vector<double>> mixed(4), split(4);
  StreamEngine rng({1, StreamPurpose::jitter, 0, 0});
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 2000; ++i) {
      mixed[c].push_back(rng.normal());
      split[c].push_back(rng.normal() + (c < 2 ? 0.0 : 3.0));
    }
  }
  CHECK(split_rhat(mixed) < 1.01);
  CHECK(split_rhat(split) > 1.05);
  // A within-chain trend is caught by splitting.
  std::vector<std::vector<double>> trend(1);
  for (int i = 0; i < 2000; ++i) trend[0].push_back(i * 1e-2 + rng.normal());
  CHECK(split_rhat(trend) > 1.05);
}

TEST_CASE("quantiles interpolate linearly") {
  CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({1, 2, 3, 4}, 0.0) == 1.0);
  CHECK(quantile({1, 2, 3, 4}, 1.0) == 4.0);
  CHECK_THROWS_AS((void)quantile({}, 0.5), InputError);
}

TEST_CASE("configuration checks") {
  McmcConfig c;
  c.chains = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.draws_per_chain = 2;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.rhat_threshold = 1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}
