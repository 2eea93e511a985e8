#include "iondyne/resonance_fit.hpp"

#include <cmath>
#include <set>

#include "iondyne/error.hpp"

namespace iondyne {

double ResonancePoint::ordinate() const {
  if (delta_r == 0.0) throw InputError("resonance point with zero delta_r");
  return static_cast<double>(side) * std::abs(stark / delta_r);
}

double ResonancePoint::ordinate_sigma() const {
  const double rel_s = stark != 0.0 ? stark_sigma / stark : 0.0;
  const double rel_r = delta_r_sigma / delta_r;
  return std::abs(ordinate()) * std::hypot(rel_s, rel_r);
}

ResonanceFit fit_resonance(const std::vector<ResonancePoint>& points) {
  std::set<double> distinct;
  for (const auto& p : points) {
    if (p.side != 1 && p.side != -1) throw InputError("resonance point side must be +1 or -1");
    if (p.delta_r == 0.0) throw InputError("resonance point with zero delta_r");
    distinct.insert(p.optical_frequency);
  }
  if (distinct.size() < 2) throw InputError("resonance fit needs at least two distinct frequencies");

  std::vector<double> x, y, w;
  for (const auto& p : points) {
    const double sigma = p.ordinate_sigma();
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw InputError("resonance point needs a positive ordinate uncertainty");
    }
    x.push_back(p.optical_frequency);
    y.push_back(p.ordinate());
    w.push_back(1.0 / (sigma * sigma));
  }

  // Center the abscissa: optical frequencies are ~1e15 rad/s while the
  // lever arm is ~1e11.
  double sw = 0.0, swx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    swx += w[i] * x[i];
  }
  ResonanceFit fit;
  fit.reference_frequency = swx / sw;
  double sxx = 0.0, sy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - fit.reference_frequency;
    sxx += w[i] * dx * dx;
    sy += w[i] * y[i];
    sxy += w[i] * dx * y[i];
  }
  if (!(sxx > 0.0)) throw NumericalError("resonance fit: singular design matrix");
  fit.slope = sxy / sxx;
  fit.intercept = sy / sw;
  if (fit.slope == 0.0) throw NumericalError("resonance fit: zero slope, no zero crossing");

  // Centered design: intercept and slope are uncorrelated.
  const double var_intercept = 1.0 / sw;
  const double var_slope = 1.0 / sxx;
  fit.zero_crossing = fit.reference_frequency - fit.intercept / fit.slope;
  const double d_intercept = -1.0 / fit.slope;
  const double d_slope = fit.intercept / (fit.slope * fit.slope);
  fit.zero_crossing_uncertainty =
      std::sqrt(d_intercept * d_intercept * var_intercept + d_slope * d_slope * var_slope);

  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.evaluate(x[i]);
    fit.chi2 += w[i] * r * r;
  }
  fit.dof = static_cast<int>(x.size()) - 2;
  return fit;
}

}  // namespace iondyne
