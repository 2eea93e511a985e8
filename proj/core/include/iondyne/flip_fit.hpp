#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "iondyne/mcmc.hpp"
#include "iondyne/simulator.hpp"

namespace iondyne {

/// Parameters of the flip-scan forward model: rates, leak factor and the
/// readout map (nuisance).
struct FlipModelParams {
  double r_plus = 0.0;
  double r_minus = 0.0;
  double leak_b = 0.0;
  SpamModel spam;

  void validate() const;
};

/// Priors: log-uniform rates on [rate_min, rate_max], uniform leak factor on
/// [0, leak_b_max], uniform readout probabilities with dark_given_up >
/// dark_given_down. `sink` ties the sink response to one of the two levels.
struct FlipPrior {
  double rate_min = 1e-2;
  double rate_max = 1e6;
  double leak_b_max = 2.0;
  SinkReadout sink = SinkReadout::bright;

  void validate() const;
};

/// Binomial log-likelihood of an up-prepared and a down-prepared scan.
class FlipLikelihood {
 public:
  /// Both scans must share the duration grid and detuning label.
  FlipLikelihood(const ShotDataset& up, const ShotDataset& down);

  /// sum over rows of log Binomial(dark | shots, q(t)), q = SPAM map of the
  /// analytic populations.
  [[nodiscard]] double operator()(const FlipModelParams& params) const;

  [[nodiscard]] const std::vector<double>& durations() const { return durations_; }

 private:
  struct Column {
    std::vector<double> dark;
    std::vector<double> bright;
    double log_binomial_coefficients = 0.0;
  };
  std::vector<double> durations_;
  Column up_;
  Column down_;
};

/// Sampling coordinates: (ln R_+, ln R_-, b, dark_given_up, dark_given_down).
inline constexpr int kFlipDimension = 5;

[[nodiscard]] FlipModelParams flip_params_from_coordinates(std::span<const double> x,
                                                           SinkReadout sink);

/// Log posterior in sampling coordinates (the priors are flat there).
[[nodiscard]] double flip_log_posterior(const FlipLikelihood& likelihood, const FlipPrior& prior,
                                        std::span<const double> x);

/// Posterior over (R_+, R_-, b, SPAM) by adaptive random-walk Metropolis,
/// started from the posterior mode. Reported parameters: r_plus, r_minus,
/// leak_b, dark_given_up, dark_given_down, delta_r (= r_minus - r_plus).
/// `converged` is false if any split R-hat exceeds the threshold.
[[nodiscard]] PosteriorEstimate fit_flip_scan(const ShotDataset& up, const ShotDataset& down,
                                              const FlipPrior& prior, const McmcConfig& mcmc,
                                              std::uint64_t seed);

}  // namespace iondyne
