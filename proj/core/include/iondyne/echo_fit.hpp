#pragma once

#include <vector>

#include "iondyne/mcmc.hpp"
#include "iondyne/simulator.hpp"

namespace iondyne {

/// Dark fractions of a spin-echo scan with their shot counts. Fractions may
/// be non-integer expectations (noiseless studies).
struct EchoPoints {
  std::vector<double> durations;  // s, ascending, arithmetic grid
  std::vector<double> fractions;
  std::vector<double> shots;

  static EchoPoints from_dataset(const ShotDataset& data);
  void validate() const;
};

struct EchoFitOptions {
  /// Fewest oscillation periods inside the scan window for a fit.
  double min_periods = 3.0;
  /// Periodogram grid points per Fourier resolution element.
  double oversample = 10.0;
  /// A second periodogram peak with at least this fraction of the top
  /// peak's power makes the frequency ambiguous.
  double ambiguity_ratio = 0.9;
};

struct PeriodogramPeak {
  double frequency;  // rad/s
  double power;      // fractional chi^2 reduction
};

/// Weighted sinusoid periodogram on [half a period per window, Nyquist]:
/// fractional chi^2 reduction of offset + a cos(wt) + b sin(wt) over a
/// constant. Returns local maxima sorted by descending power.
[[nodiscard]] std::vector<PeriodogramPeak> echo_periodogram(const EchoPoints& points,
                                                            double oversample);

/// Oscillation fit of offset + contrast exp(-decay t) cos(stark t + phase).
///
/// Gaussian approximation of the binomial noise, variance
/// max(q(1-q), 1/(4n))/n from the observed fraction q. The periodogram
/// peak seeds a Levenberg-Marquardt refinement. Reported parameters:
/// stark (|Delta_S|, rad/s), contrast (at the first scan point), offset,
/// phase, decay_rate, each as
/// estimate +- one standard uncertainty from the fit covariance; rhat is
/// NaN. Throws IdentifiabilityError when fewer than `min_periods` periods
/// fit the window and AmbiguityError when two periodogram peaks compete.
[[nodiscard]] PosteriorEstimate fit_echo_scan(const EchoPoints& points,
                                              const EchoFitOptions& options = {});
[[nodiscard]] PosteriorEstimate fit_echo_scan(const ShotDataset& data,
                                              const EchoFitOptions& options = {});

}  // namespace iondyne
