#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace iondyne {

struct McmcConfig {
  int chains = 4;
  int burn_in = 5000;
  int draws_per_chain = 20000;
  /// Iterations between proposal-covariance updates during burn-in.
  int adapt_interval = 100;
  double rhat_threshold = 1.05;
  unsigned threads = 1;

  void validate() const;
};

/// Log target density over an unconstrained-looking vector; returns -inf
/// outside the support.
using LogDensity = std::function<double(std::span<const double>)>;

struct ChainOutput {
  Eigen::MatrixXd draws;  // draws_per_chain x dim
  double acceptance_rate = 0.0;
};

/// Random-walk Metropolis with a Gaussian proposal. During burn-in the
/// proposal covariance is re-estimated every `adapt_interval` iterations
/// from the chain's own history and a global scale is steered towards
/// ~25% acceptance; both are frozen before the retained draws. Each chain
/// owns the stream (seed, mcmc, chain index) and chains may run in
/// parallel without changing the result.
[[nodiscard]] std::vector<ChainOutput> run_adaptive_metropolis(
    const LogDensity& log_density, const std::vector<Eigen::VectorXd>& starts,
    const Eigen::MatrixXd& initial_covariance, const McmcConfig& config, std::uint64_t seed);

/// Split-chain potential scale reduction (Gelman et al., BDA3 sec. 11.4).
/// Each chain is halved; returns 1 for perfectly mixed chains.
[[nodiscard]] double split_rhat(const std::vector<std::vector<double>>& chains);

/// Linear-interpolated quantile of unsorted data, q in [0, 1].
[[nodiscard]] double quantile(std::vector<double> values, double q);

struct ParameterSummary {
  std::string name;
  double median = 0.0;
  double ci68_lo = 0.0;
  double ci68_hi = 0.0;
  double rhat = 1.0;  // NaN when not sampled (least-squares fits)

  /// Half-width of the central 68% interval.
  [[nodiscard]] double sigma() const { return 0.5 * (ci68_hi - ci68_lo); }
};

/// Posterior summary: median and central 68% interval per parameter plus
/// chain diagnostics and the pooled retained draws (columns follow
/// `parameters`).
struct PosteriorEstimate {
  std::vector<ParameterSummary> parameters;
  double acceptance_rate = 0.0;
  bool converged = true;
  Eigen::MatrixXd samples;

  [[nodiscard]] const ParameterSummary& at(const std::string& name) const;
  [[nodiscard]] bool has(const std::string& name) const;
};

/// Summarize chains of named columns: pooled median/68% interval and split
/// R-hat per column; `converged` is false if any R-hat exceeds threshold.
[[nodiscard]] PosteriorEstimate summarize_chains(const std::vector<Eigen::MatrixXd>& chains,
                                                 const std::vector<std::string>& names,
                                                 double rhat_threshold);

}  // namespace iondyne
