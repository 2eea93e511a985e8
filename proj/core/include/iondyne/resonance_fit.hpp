#pragma once

#include <vector>

namespace iondyne {

/// One measurement run as seen by the resonance regression.
struct ResonancePoint {
  double optical_frequency = 0.0;  // rad/s, wavemeter reading
  int side = 1;                    // sign of the nominal detuning, +1 or -1
  double stark = 0.0;              // rad/s; only |stark| is used
  double stark_sigma = 0.0;
  double delta_r = 0.0;  // 1/s; only |delta_r| is used
  double delta_r_sigma = 0.0;

  /// side * |stark / delta_r|, which equals 3 Delta / gamma_ps.
  [[nodiscard]] double ordinate() const;
  /// First-order uncertainty of `ordinate()`.
  [[nodiscard]] double ordinate_sigma() const;
};

/// Weighted straight line y = intercept + slope (x - reference) through the
/// ordinates, with x the optical frequency. The zero crossing is the
/// resonance frequency.
struct ResonanceFit {
  double slope = 0.0;                 // s (ordinate per rad/s)
  double intercept = 0.0;             // ordinate at x = reference
  double reference_frequency = 0.0;   // weighted mean abscissa, rad/s
  double zero_crossing = 0.0;         // rad/s
  double zero_crossing_uncertainty = 0.0;
  double chi2 = 0.0;
  int dof = 0;

  [[nodiscard]] double evaluate(double optical_frequency) const {
    return intercept + slope * (optical_frequency - reference_frequency);
  }
};

/// Weighted least squares (weights 1/sigma_y^2, x exact). The zero-crossing
/// uncertainty follows from the unscaled fit covariance to first order.
/// Throws InputError for fewer than two distinct frequencies or a zero
/// delta_r, NumericalError for a degenerate fit.
[[nodiscard]] ResonanceFit fit_resonance(const std::vector<ResonancePoint>& points);

}  // namespace iondyne
