#include "iondyne/echo_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <gsl/gsl_blas.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multifit_nlinear.h>

#include "iondyne/error.hpp"
#include "iondyne/units.hpp"

namespace iondyne {

EchoPoints EchoPoints::from_dataset(const ShotDataset& data) {
  data.validate();
  EchoPoints p;
  for (const auto& row : data.rows) {
    p.durations.push_back(row.duration);
    p.fractions.push_back(row.dark_fraction());
    p.shots.push_back(static_cast<double>(row.shots));
  }
  return p;
}

void EchoPoints::validate() const {
  if (durations.size() != fractions.size() || durations.size() != shots.size()) {
    throw InputError("echo points: column lengths differ");
  }
  if (durations.size() < 6) throw InputError("echo points: need at least 6 points");
  for (std::size_t i = 1; i < durations.size(); ++i) {
    if (!(durations[i] > durations[i - 1])) throw InputError("echo durations must increase");
  }
  for (double n : shots) {
    if (!(n > 0.0)) throw InputError("echo points: shots must be positive");
  }
}

namespace {

std::vector<double> inverse_variances(const EchoPoints& p) {
  std::vector<double> w(p.fractions.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double n = p.shots[i];
    const double q = p.fractions[i];
    w[i] = n / std::max(q * (1.0 - q), 1.0 / (4.0 * n));
  }
  return w;
}

// Weighted chi^2 of the best fit of c0 + c1 cos(wt) + c2 sin(wt).
double sinusoid_chi2(const EchoPoints& p, const std::vector<double>& w, double omega) {
  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  double yy = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Eigen::Vector3d basis(1.0, std::cos(omega * p.durations[i]),
                                std::sin(omega * p.durations[i]));
    normal += w[i] * basis * basis.transpose();
    rhs += w[i] * p.fractions[i] * basis;
    yy += w[i] * p.fractions[i] * p.fractions[i];
  }
  const Eigen::Vector3d coef = normal.ldlt().solve(rhs);
  return std::max(0.0, yy - coef.dot(rhs));
}

double constant_chi2(const EchoPoints& p, const std::vector<double>& w) {
  double sw = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sw += w[i];
    swy += w[i] * p.fractions[i];
  }
  const double mean = swy / sw;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    chi2 += w[i] * (p.fractions[i] - mean) * (p.fractions[i] - mean);
  }
  return chi2;
}

double window(const EchoPoints& p) { return p.durations.back() - p.durations.front(); }

double min_spacing(const EchoPoints& p) {
  double dt = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < p.durations.size(); ++i) {
    dt = std::min(dt, p.durations[i] - p.durations[i - 1]);
  }
  return dt;
}

// Model in scaled time s = (t - t0) / T with parameters
// (offset, a, b, w, k): y = offset + exp(-k s) (a cos(w s) + b sin(w s)).
struct ScaledData {
  std::vector<double> s, y, sqrt_w;
};

int residual_f(const gsl_vector* x, void* data, gsl_vector* f) {
  const auto* d = static_cast<const ScaledData*>(data);
  const double off = gsl_vector_get(x, 0), a = gsl_vector_get(x, 1), b = gsl_vector_get(x, 2);
  const double w = gsl_vector_get(x, 3), k = gsl_vector_get(x, 4);
  for (std::size_t i = 0; i < d->s.size(); ++i) {
    const double s = d->s[i];
    const double model = off + std::exp(-k * s) * (a * std::cos(w * s) + b * std::sin(w * s));
    gsl_vector_set(f, i, d->sqrt_w[i] * (model - d->y[i]));
  }
  return GSL_SUCCESS;
}

int residual_df(const gsl_vector* x, void* data, gsl_matrix* jac) {
  const auto* d = static_cast<const ScaledData*>(data);
  const double a = gsl_vector_get(x, 1), b = gsl_vector_get(x, 2);
  const double w = gsl_vector_get(x, 3), k = gsl_vector_get(x, 4);
  for (std::size_t i = 0; i < d->s.size(); ++i) {
    const double s = d->s[i];
    const double e = std::exp(-k * s);
    const double c = std::cos(w * s), sn = std::sin(w * s);
    const double sw = d->sqrt_w[i];
    gsl_matrix_set(jac, i, 0, sw);
    gsl_matrix_set(jac, i, 1, sw * e * c);
    gsl_matrix_set(jac, i, 2, sw * e * sn);
    gsl_matrix_set(jac, i, 3, sw * e * s * (-a * sn + b * c));
    gsl_matrix_set(jac, i, 4, sw * -s * e * (a * c + b * sn));
  }
  return GSL_SUCCESS;
}

ParameterSummary summary(std::string name, double value, double sigma) {
  return {std::move(name), value, value - sigma, value + sigma,
          std::numeric_limits<double>::quiet_NaN()};
}

}  // namespace

std::vector<PeriodogramPeak> echo_periodogram(const EchoPoints& points, double oversample) {
  points.validate();
  const auto w = inverse_variances(points);
  const double span = window(points);
  const double chi2_0 = constant_chi2(points, w);
  const double resolution = kTwoPi / span;
  const double lo = 0.5 * resolution;
  const double hi = kPi / min_spacing(points);
  const double step = resolution / std::max(1.0, oversample);

  std::vector<double> freq, power;
  for (double omega = lo; omega <= hi; omega += step) {
    freq.push_back(omega);
    power.push_back(chi2_0 > 0.0 ? 1.0 - sinusoid_chi2(points, w, omega) / chi2_0 : 0.0);
  }
  std::vector<PeriodogramPeak> peaks;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    const bool left = i == 0 || power[i] > power[i - 1];
    const bool right = i + 1 == freq.size() || power[i] >= power[i + 1];
    if (left && right) peaks.push_back({freq[i], power[i]});
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const auto& x, const auto& y) { return x.power > y.power; });
  return peaks;
}

PosteriorEstimate fit_echo_scan(const ShotDataset& data, const EchoFitOptions& options) {
  if (data.metadata.kind != ScanKind::echo) throw InputError("fit_echo_scan needs an echo dataset");
  return fit_echo_scan(EchoPoints::from_dataset(data), options);
}

PosteriorEstimate fit_echo_scan(const EchoPoints& points, const EchoFitOptions& options) {
  const auto peaks = echo_periodogram(points, options.oversample);
  if (peaks.empty() || !(peaks.front().power > 0.0)) {
    throw IdentifiabilityError("echo scan shows no oscillation; record a longer or denser scan");
  }
  const double span = window(points);
  const double resolution = kTwoPi / span;
  const PeriodogramPeak top = peaks.front();

  std::vector<PeriodogramPeak> rivals;
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    if (std::abs(peaks[i].frequency - top.frequency) > 2.0 * resolution &&
        peaks[i].power >= options.ambiguity_ratio * top.power) {
      rivals.push_back(peaks[i]);
    }
  }
  if (!rivals.empty()) {
    std::string list = fmt::format("2pi x {:.4f} MHz (power {:.3f})", mhz_from_angular(top.frequency),
                                   top.power);
    for (const auto& r : rivals) {
      list += fmt::format(", 2pi x {:.4f} MHz (power {:.3f})", mhz_from_angular(r.frequency), r.power);
    }
    throw AmbiguityError("ambiguous echo periodogram; candidate frequencies: " + list);
  }
  if (top.frequency * span < kTwoPi * options.min_periods) {
    throw IdentifiabilityError(fmt::format(
        "echo scan covers only {:.2f} oscillation periods (need {}); record a longer scan",
        top.frequency * span / kTwoPi, options.min_periods));
  }

  // Linear seed at the periodogram frequency, then all five parameters.
  const auto w = inverse_variances(points);
  const double t0 = points.durations.front();
  ScaledData scaled;
  for (std::size_t i = 0; i < w.size(); ++i) {
    scaled.s.push_back((points.durations[i] - t0) / span);
    scaled.y.push_back(points.fractions[i]);
    scaled.sqrt_w.push_back(std::sqrt(w[i]));
  }
  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  const double ws0 = top.frequency * span;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Eigen::Vector3d basis(1.0, std::cos(ws0 * scaled.s[i]), std::sin(ws0 * scaled.s[i]));
    normal += w[i] * basis * basis.transpose();
    rhs += w[i] * scaled.y[i] * basis;
  }
  const Eigen::Vector3d seed = normal.ldlt().solve(rhs);

  const std::size_t n = w.size();
  constexpr std::size_t p = 5;
  gsl_multifit_nlinear_fdf fdf;
  fdf.f = residual_f;
  fdf.df = residual_df;
  fdf.fvv = nullptr;
  fdf.n = n;
  fdf.p = p;
  fdf.params = &scaled;

  gsl_multifit_nlinear_parameters params = gsl_multifit_nlinear_default_parameters();
  gsl_multifit_nlinear_workspace* work =
      gsl_multifit_nlinear_alloc(gsl_multifit_nlinear_trust, &params, n, p);
  gsl_vector* x0 = gsl_vector_alloc(p);
  gsl_vector_set(x0, 0, seed[0]);
  gsl_vector_set(x0, 1, seed[1]);
  gsl_vector_set(x0, 2, seed[2]);
  gsl_vector_set(x0, 3, ws0);
  gsl_vector_set(x0, 4, 0.0);

  gsl_error_handler_t* previous = gsl_set_error_handler_off();
  gsl_multifit_nlinear_init(x0, &fdf, work);
  int info = 0;
  const int status = gsl_multifit_nlinear_driver(500, 1e-14, 1e-14, 0.0, nullptr, nullptr, &info,
                                                 work);
  gsl_matrix* cov = gsl_matrix_alloc(p, p);
  gsl_multifit_nlinear_covar(gsl_multifit_nlinear_jac(work), 0.0, cov);
  gsl_set_error_handler(previous);

  Eigen::Matrix<double, 5, 1> x;
  Eigen::Matrix<double, 5, 5> c;
  for (std::size_t i = 0; i < p; ++i) {
    x[static_cast<int>(i)] = gsl_vector_get(gsl_multifit_nlinear_position(work), i);
    for (std::size_t j = 0; j < p; ++j) {
      c(static_cast<int>(i), static_cast<int>(j)) = gsl_matrix_get(cov, i, j);
    }
  }
  gsl_matrix_free(cov);
  gsl_vector_free(x0);
  gsl_multifit_nlinear_free(work);
  if (status != GSL_SUCCESS && status != GSL_EMAXITER) {
    throw NumericalError(fmt::format("echo fit did not converge: {}", gsl_strerror(status)));
  }
  if (!x.allFinite() || !c.allFinite()) throw NumericalError("echo fit produced non-finite values");

  // Back to physical units; (a, b) -> contrast, phase about t = 0.
  const double off = x[0], a = x[1], b = x[2];
  double omega = x[3] / span;
  const double decay = x[4] / span;
  // y = off + C e^{-k(t - t0)} cos(w (t - t0) - atan2(b, a)).
  double contrast = std::hypot(a, b);
  double phase = -std::atan2(b, a) - omega * t0;
  Eigen::Matrix<double, 5, 5> jac = Eigen::Matrix<double, 5, 5>::Zero();
  jac(0, 0) = 1.0;  // offset
  if (contrast > 0.0) {
    jac(1, 1) = a / contrast;  // contrast
    jac(1, 2) = b / contrast;
    jac(2, 1) = b / (contrast * contrast);  // phase
    jac(2, 2) = -a / (contrast * contrast);
    jac(2, 3) = -t0 / span;
  }
  jac(3, 3) = 1.0 / span;  // omega
  jac(4, 4) = 1.0 / span;  // decay
  const Eigen::Matrix<double, 5, 5> phys = jac * c * jac.transpose();
  // A cosine cannot tell the sign of its frequency; report |Delta_S|.
  if (omega < 0.0) {
    omega = -omega;
    phase = -phase;
  }
  phase = std::remainder(phase, kTwoPi);

  PosteriorEstimate est;
  est.parameters = {
      summary("stark", omega, std::sqrt(phys(3, 3))),
      summary("contrast", contrast, std::sqrt(phys(1, 1))),
      summary("offset", off, std::sqrt(phys(0, 0))),
      summary("phase", phase, std::sqrt(phys(2, 2))),
      summary("decay_rate", decay, std::sqrt(phys(4, 4))),
  };
  est.acceptance_rate = std::numeric_limits<double>::quiet_NaN();
  est.converged = true;
  return est;
}

}  // namespace iondyne
