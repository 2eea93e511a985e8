#include "iondyne/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "iondyne/error.hpp"
#include "iondyne/parallel.hpp"
#include "iondyne/rng.hpp"

namespace iondyne {

void McmcConfig::validate() const {
  if (chains < 1) throw DomainError("mcmc.chains must be >= 1");
  if (burn_in < 0) throw DomainError("mcmc.burn_in must be >= 0");
  if (draws_per_chain < 4) throw DomainError("mcmc.draws_per_chain must be >= 4");
  if (adapt_interval < 10) throw DomainError("mcmc.adapt_interval must be >= 10");
  if (!(rhat_threshold > 1.0)) throw DomainError("mcmc.rhat_threshold must exceed 1");
}

namespace {

// Lower Cholesky factor; adds diagonal jitter until the matrix factorizes.
Eigen::MatrixXd proposal_factor(Eigen::MatrixXd cov) {
  const double trace_scale = std::max(cov.diagonal().mean(), 1e-300);
  double jitter = 0.0;
  for (int attempt = 0; attempt < 20; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter = jitter == 0.0 ? 1e-12 * trace_scale : jitter * 10.0;
    cov.diagonal().array() += jitter;
  }
  throw NumericalError("proposal covariance is not positive definite");
}

ChainOutput run_chain(const LogDensity& log_density, const Eigen::VectorXd& start,
                      const Eigen::MatrixXd& initial_covariance, const McmcConfig& config,
                      std::uint64_t seed, std::uint32_t chain) {
  const Eigen::Index dim = start.size();
  StreamEngine rng({seed, StreamPurpose::mcmc, chain, 0});

  const double optimal_scale = 2.38 * 2.38 / static_cast<double>(dim);
  Eigen::MatrixXd shape = initial_covariance;
  double log_scale = 0.0;
  Eigen::MatrixXd factor = proposal_factor(shape);

  Eigen::VectorXd current = start;
  double current_lp = log_density({current.data(), static_cast<std::size_t>(dim)});
  if (!std::isfinite(current_lp)) throw DomainError("MCMC start outside the posterior support");

  // Running moments of the burn-in history for covariance adaptation.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(dim, dim);
  long history = 0;

  ChainOutput out;
  out.draws.resize(config.draws_per_chain, dim);
  long accepted = 0;
  Eigen::VectorXd z(dim);
  Eigen::VectorXd proposal(dim);

  const int total = config.burn_in + config.draws_per_chain;
  for (int it = 0; it < total; ++it) {
    for (Eigen::Index j = 0; j < dim; ++j) z[j] = rng.normal();
    proposal = current + std::exp(0.5 * log_scale) * (factor * z);
    const double lp = log_density({proposal.data(), static_cast<std::size_t>(dim)});
    const bool accept = std::isfinite(lp) && std::log(rng.uniform()) < lp - current_lp;
    if (accept) {
      current = proposal;
      current_lp = lp;
    }

    if (it < config.burn_in) {
      // Robbins-Monro on the global scale, target acceptance 0.25.
      const double gain = 1.0 / std::sqrt(1.0 + it / 10.0);
      log_scale += gain * ((accept ? 1.0 : 0.0) - 0.25);
      log_scale = std::clamp(log_scale, -20.0, 10.0);

      if (it >= config.burn_in / 4) {
        ++history;
        const Eigen::VectorXd delta = current - mean;
        mean += delta / static_cast<double>(history);
        scatter += delta * (current - mean).transpose();
      }
      if ((it + 1) % config.adapt_interval == 0 && history > 10 * dim) {
        shape = scatter / static_cast<double>(history - 1) * optimal_scale;
        factor = proposal_factor(shape);
      }
    } else {
      if (accept) ++accepted;
      out.draws.row(it - config.burn_in) = current.transpose();
    }
  }
  out.acceptance_rate = static_cast<double>(accepted) / config.draws_per_chain;
  return out;
}

}  // namespace

std::vector<ChainOutput> run_adaptive_metropolis(const LogDensity& log_density,
                                                 const std::vector<Eigen::VectorXd>& starts,
                                                 const Eigen::MatrixXd& initial_covariance,
                                                 const McmcConfig& config, std::uint64_t seed) {
  config.validate();
  if (static_cast<int>(starts.size()) != config.chains) {
    throw DomainError("one start point per chain required");
  }
  std::vector<ChainOutput> chains(starts.size());
  parallel_for(starts.size(), config.threads, [&](std::size_t c) {
    chains[c] = run_chain(log_density, starts[c], initial_covariance, config, seed,
                          static_cast<std::uint32_t>(c));
  });
  return chains;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& chain : chains) {
    const std::size_t half = chain.size() / 2;
    if (half < 2) throw DomainError("split R-hat needs at least 4 draws per chain");
    halves.emplace_back(chain.begin(), chain.begin() + static_cast<long>(half));
    halves.emplace_back(chain.end() - static_cast<long>(half), chain.end());
  }
  const double n = static_cast<double>(halves.front().size());
  const double m = static_cast<double>(halves.size());
  std::vector<double> means;
  double within = 0.0;
  for (const auto& h : halves) {
    double mu = 0.0;
    for (double x : h) mu += x;
    mu /= n;
    double var = 0.0;
    for (double x : h) var += (x - mu) * (x - mu);
    within += var / (n - 1.0);
    means.push_back(mu);
  }
  within /= m;
  double grand = 0.0;
  for (double mu : means) grand += mu;
  grand /= m;
  double between = 0.0;
  for (double mu : means) between += (mu - grand) * (mu - grand);
  between *= n / (m - 1.0);

  if (within <= 0.0) return between <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double var_plus = (n - 1.0) / n * within + between / n;
  return std::sqrt(var_plus / within);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

const ParameterSummary& PosteriorEstimate::at(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p;
  }
  throw InputError("estimate has no parameter '" + name + "'");
}

bool PosteriorEstimate::has(const std::string& name) const {
  return std::any_of(parameters.begin(), parameters.end(),
                     [&](const auto& p) { return p.name == name; });
}

PosteriorEstimate summarize_chains(const std::vector<Eigen::MatrixXd>& chains,
                                   const std::vector<std::string>& names,
                                   double rhat_threshold) {
  if (chains.empty()) throw DomainError("no chains to summarize");
  const Eigen::Index cols = chains.front().cols();
  if (static_cast<std::size_t>(cols) != names.size()) {
    throw DomainError("column names do not match chain width");
  }
  Eigen::Index rows = 0;
  for (const auto& c : chains) rows += c.rows();

  PosteriorEstimate est;
  est.samples.resize(rows, cols);
  Eigen::Index offset = 0;
  for (const auto& c : chains) {
    est.samples.middleRows(offset, c.rows()) = c;
    offset += c.rows();
  }

  for (Eigen::Index j = 0; j < cols; ++j) {
    std::vector<double> pooled(est.samples.col(j).data(), est.samples.col(j).data() + rows);
    std::vector<std::vector<double>> per_chain;
    for (const auto& c : chains) {
      per_chain.emplace_back(c.col(j).data(), c.col(j).data() + c.rows());
    }
    ParameterSummary s;
    s.name = names[static_cast<std::size_t>(j)];
    s.median = quantile(pooled, 0.5);
    s.ci68_lo = quantile(pooled, 0.15865525393145707);
    s.ci68_hi = quantile(pooled, 0.8413447460685429);
    s.rhat = split_rhat(per_chain);
    if (!(s.rhat <= rhat_threshold)) est.converged = false;
    est.parameters.push_back(s);
  }
  return est;
}

}  // namespace iondyne
