#include "iondyne/flip_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <fmt/format.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "iondyne/error.hpp"
#include "iondyne/rng.hpp"

namespace iondyne {

void FlipModelParams::validate() const {
  if (!(r_plus >= 0.0) || !(r_minus >= 0.0)) throw DomainError("rates must be >= 0");
  if (!(leak_b >= 0.0)) throw DomainError("leak factor must be >= 0");
  spam.validate();
}

void FlipPrior::validate() const {
  if (!(rate_min > 0.0 && rate_max > rate_min)) {
    throw DomainError("rate prior needs 0 < rate_min < rate_max");
  }
  if (!(leak_b_max > 0.0)) throw DomainError("leak_b_max must be positive");
}

FlipLikelihood::FlipLikelihood(const ShotDataset& up, const ShotDataset& down) {
  if (up.metadata.detuning_label != down.metadata.detuning_label) {
    throw InputError("flip scans belong to different detunings ('" +
                     up.metadata.detuning_label + "' vs '" + down.metadata.detuning_label + "')");
  }
  if (up.rows.size() != down.rows.size() || up.rows.empty()) {
    throw InputError("flip scans do not share a duration grid");
  }
  up.validate();
  down.validate();
  for (std::size_t i = 0; i < up.rows.size(); ++i) {
    if (up.rows[i].duration != down.rows[i].duration) {
      throw InputError(fmt::format("flip scans do not share a duration grid (row {})", i));
    }
    if (up.rows[i].initialization != Initialization::up ||
        down.rows[i].initialization != Initialization::down) {
      throw InputError("flip scans must be prepared in up and down respectively");
    }
    durations_.push_back(up.rows[i].duration);
  }
  auto fill = [](const ShotDataset& d, Column& col) {
    for (const auto& row : d.rows) {
      const double k = static_cast<double>(row.dark_count);
      const double n = static_cast<double>(row.shots);
      col.dark.push_back(k);
      col.bright.push_back(n - k);
      col.log_binomial_coefficients +=
          std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    }
  };
  fill(up, up_);
  fill(down, down_);
}

double FlipLikelihood::operator()(const FlipModelParams& params) const {
  const DynamicsParams dyn({params.r_plus, params.r_minus}, params.leak_b);
  const auto& spam = params.spam;
  constexpr double kFloor = 1e-300;

  auto column_loglik = [&](const Column& col, Spin init) {
    double ll = col.log_binomial_coefficients;
    for (std::size_t i = 0; i < durations_.size(); ++i) {
      const PopulationState s = evolve_analytic(dyn, init, durations_[i]);
      const double q = std::clamp(spam.dark_probability(s), 0.0, 1.0);
      if (col.dark[i] > 0.0) ll += col.dark[i] * std::log(std::max(q, kFloor));
      if (col.bright[i] > 0.0) ll += col.bright[i] * std::log(std::max(1.0 - q, kFloor));
    }
    return ll;
  };
  return column_loglik(up_, Spin::up) + column_loglik(down_, Spin::down);
}

FlipModelParams flip_params_from_coordinates(std::span<const double> x, SinkReadout sink) {
  FlipModelParams p;
  p.r_plus = std::exp(x[0]);
  p.r_minus = std::exp(x[1]);
  p.leak_b = x[2];
  p.spam.dark_given_up = x[3];
  p.spam.dark_given_down = x[4];
  p.spam.dark_given_sink = sink == SinkReadout::bright ? x[4] : x[3];
  return p;
}

double flip_log_posterior(const FlipLikelihood& likelihood, const FlipPrior& prior,
                          std::span<const double> x) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const double lo = std::log(prior.rate_min);
  const double hi = std::log(prior.rate_max);
  if (!(x[0] >= lo && x[0] <= hi && x[1] >= lo && x[1] <= hi)) return kNegInf;
  if (!(x[2] >= 0.0 && x[2] <= prior.leak_b_max)) return kNegInf;
  if (!(x[3] >= 0.0 && x[3] <= 1.0 && x[4] >= 0.0 && x[4] < x[3])) return kNegInf;
  const double ll = likelihood(flip_params_from_coordinates(x, prior.sink));
  return std::isfinite(ll) ? ll : kNegInf;
}

namespace {

using Vector5 = Eigen::Matrix<double, kFlipDimension, 1>;
using Matrix5 = Eigen::Matrix<double, kFlipDimension, kFlipDimension>;

struct Objective {
  const FlipLikelihood* likelihood;
  const FlipPrior* prior;
};

double negative_log_posterior(const gsl_vector* v, void* data) {
  const auto* obj = static_cast<const Objective*>(data);
  double x[kFlipDimension];
  for (int i = 0; i < kFlipDimension; ++i) x[i] = gsl_vector_get(v, static_cast<std::size_t>(i));
  const double lp = flip_log_posterior(*obj->likelihood, *obj->prior, x);
  return std::isfinite(lp) ? -lp : std::numeric_limits<double>::max();
}

// Coarse search over the rates and leak factor with SPAM read off the
// earliest points, to seed the simplex search.
Vector5 initial_guess(const ShotDataset& up, const ShotDataset& down,
                      const FlipLikelihood& likelihood, const FlipPrior& prior) {
  const auto earliest = [](const ShotDataset& d) {
    return *std::min_element(d.rows.begin(), d.rows.end(),
                             [](const auto& a, const auto& b) { return a.duration < b.duration; });
  };
  const double s_up = std::clamp(earliest(up).dark_fraction(), 0.05, 0.999);
  const double s_down = std::clamp(earliest(down).dark_fraction(), 0.0005, s_up - 0.01);
  const auto& grid = likelihood.durations();
  const double t_max = std::max(*std::max_element(grid.begin(), grid.end()), 1e-12);

  Vector5 best;
  double best_lp = -std::numeric_limits<double>::infinity();
  const double lo = std::log(prior.rate_min);
  const double hi = std::log(prior.rate_max);
  // Rates that act on the scan window: 0.01 / t_max .. 1000 / t_max.
  const double scan_lo = std::clamp(std::log(0.01 / t_max), lo, hi);
  const double scan_hi = std::clamp(std::log(1000.0 / t_max), lo, hi);
  constexpr int kRateSteps = 24;
  for (int i = 0; i < kRateSteps; ++i) {
    for (int j = 0; j < kRateSteps; ++j) {
      for (double b : {0.0, 0.1, 0.25, 0.5, 1.0}) {
        if (b > prior.leak_b_max) continue;
        Vector5 x;
        x << scan_lo + (scan_hi - scan_lo) * i / (kRateSteps - 1),
            scan_lo + (scan_hi - scan_lo) * j / (kRateSteps - 1), b, s_up, s_down;
        const double lp = flip_log_posterior(likelihood, prior, {x.data(), kFlipDimension});
        if (lp > best_lp) {
          best_lp = lp;
          best = x;
        }
      }
    }
  }
  if (!std::isfinite(best_lp)) throw NumericalError("flip fit: no admissible starting point");
  return best;
}

Vector5 find_mode(const FlipLikelihood& likelihood, const FlipPrior& prior, Vector5 start) {
  Objective obj{&likelihood, &prior};
  gsl_multimin_function fn{&negative_log_posterior, kFlipDimension, &obj};
  gsl_vector* x = gsl_vector_alloc(kFlipDimension);
  gsl_vector* step = gsl_vector_alloc(kFlipDimension);
  gsl_multimin_fminimizer* solver =
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, kFlipDimension);

  const double steps[kFlipDimension] = {0.3, 0.3, 0.05, 0.01, 0.01};
  // Restarting the simplex guards against premature collapse.
  for (int restart = 0; restart < 3; ++restart) {
    for (int i = 0; i < kFlipDimension; ++i) {
      gsl_vector_set(x, static_cast<std::size_t>(i), start[i]);
      gsl_vector_set(step, static_cast<std::size_t>(i), steps[i] / (1 + restart));
    }
    gsl_multimin_fminimizer_set(solver, &fn, x, step);
    for (int iter = 0; iter < 4000; ++iter) {
      if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), 1e-9) == GSL_SUCCESS) break;
    }
    for (int i = 0; i < kFlipDimension; ++i) {
      start[i] = gsl_vector_get(solver->x, static_cast<std::size_t>(i));
    }
  }
  gsl_multimin_fminimizer_free(solver);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return start;
}

// Inverse of the finite-difference Hessian of -log posterior at the mode,
// falling back to a diagonal guess when it is not positive definite.
Matrix5 laplace_covariance(const FlipLikelihood& likelihood, const FlipPrior& prior,
                           const Vector5& mode) {
  const double h[kFlipDimension] = {1e-3, 1e-3, 1e-4, 1e-5, 1e-5};
  auto f = [&](const Vector5& x) {
    return -flip_log_posterior(likelihood, prior, {x.data(), kFlipDimension});
  };
  Matrix5 hess;
  const double f0 = f(mode);
  for (int i = 0; i < kFlipDimension; ++i) {
    for (int j = i; j < kFlipDimension; ++j) {
      Vector5 pp = mode, pm = mode, mp = mode, mm = mode;
      pp[i] += h[i]; pp[j] += h[j];
      pm[i] += h[i]; pm[j] -= h[j];
      mp[i] -= h[i]; mp[j] += h[j];
      mm[i] -= h[i]; mm[j] -= h[j];
      double v;
      if (i == j) {
        Vector5 p = mode, m = mode;
        p[i] += h[i];
        m[i] -= h[i];
        v = (f(p) - 2.0 * f0 + f(m)) / (h[i] * h[i]);
      } else {
        v = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
      }
      hess(i, j) = hess(j, i) = v;
    }
  }
  Eigen::LLT<Matrix5> llt(hess);
  if (hess.allFinite() && llt.info() == Eigen::Success) {
    Matrix5 cov = llt.solve(Matrix5::Identity());
    if (cov.allFinite()) return cov;
  }
  Matrix5 cov = Matrix5::Zero();
  for (int i = 0; i < kFlipDimension; ++i) cov(i, i) = 0.01 * h[i] * h[i] * 1e4;
  return cov;
}

}  // namespace

PosteriorEstimate fit_flip_scan(const ShotDataset& up, const ShotDataset& down,
                                const FlipPrior& prior, const McmcConfig& mcmc,
                                std::uint64_t seed) {
  prior.validate();
  mcmc.validate();
  const FlipLikelihood likelihood(up, down);

  Vector5 mode = find_mode(likelihood, prior, initial_guess(up, down, likelihood, prior));
  const Matrix5 cov = laplace_covariance(likelihood, prior, mode);

  // Overdispersed starts around the mode; redraw until inside the support.
  std::vector<Eigen::VectorXd> starts;
  const Eigen::LLT<Matrix5> llt(cov);
  const Matrix5 factor = llt.matrixL();
  StreamEngine jitter({seed, StreamPurpose::jitter, 0, 0});
  for (int c = 0; c < mcmc.chains; ++c) {
    Vector5 start = mode;
    for (int attempt = 0; attempt < 100; ++attempt) {
      Vector5 z;
      for (int i = 0; i < kFlipDimension; ++i) z[i] = jitter.normal();
      const Vector5 candidate = mode + 2.0 * (factor * z);
      if (std::isfinite(flip_log_posterior(likelihood, prior, {candidate.data(), kFlipDimension}))) {
        start = candidate;
        break;
      }
    }
    starts.emplace_back(start);
  }

  const LogDensity density = [&](std::span<const double> x) {
    return flip_log_posterior(likelihood, prior, x);
  };
  const Eigen::MatrixXd proposal = cov * (2.38 * 2.38 / kFlipDimension);
  const auto chains = run_adaptive_metropolis(density, starts, proposal, mcmc, seed);

  std::vector<Eigen::MatrixXd> physical;
  double acceptance = 0.0;
  for (const auto& chain : chains) {
    Eigen::MatrixXd m(chain.draws.rows(), 6);
    m.col(0) = chain.draws.col(0).array().exp();
    m.col(1) = chain.draws.col(1).array().exp();
    m.col(2) = chain.draws.col(2);
    m.col(3) = chain.draws.col(3);
    m.col(4) = chain.draws.col(4);
    m.col(5) = m.col(1) - m.col(0);
    physical.push_back(std::move(m));
    acceptance += chain.acceptance_rate;
  }
  PosteriorEstimate est = summarize_chains(
      physical, {"r_plus", "r_minus", "leak_b", "dark_given_up", "dark_given_down", "delta_r"},
      mcmc.rhat_threshold);
  est.acceptance_rate = acceptance / static_cast<double>(chains.size());
  return est;
}

}  // namespace iondyne
