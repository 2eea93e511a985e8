#include "oracles.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

long double stark(const Field& f) {
  // (1/3) * Omega^2 / (4 Delta) * (eps-^2 - eps+^2)
  const long double omega2 = f.rabi * f.rabi;
  return omega2 / (12.0L * f.detuning) * (f.minus - f.plus);
}

long double rate_plus(const Field& f, long double gamma) {
  return gamma * (f.plus + f.pi) / 9.0L * f.rabi * f.rabi / (4.0L * f.detuning * f.detuning);
}

long double rate_minus(const Field& f, long double gamma) {
  return gamma * (f.minus + f.pi) / 9.0L * f.rabi * f.rabi / (4.0L * f.detuning * f.detuning);
}

std::array<double, 3> populations_expm(double r_plus, double r_minus, double b, bool init_up,
                                       double t) {
  Eigen::Matrix2d g;
  g << -r_minus * (1.0 + b), r_plus,  //
      r_minus, -r_plus * (1.0 + b);
  const Eigen::Matrix2d propagator = (g * t).exp();
  const Eigen::Vector2d p0 = init_up ? Eigen::Vector2d(1.0, 0.0) : Eigen::Vector2d(0.0, 1.0);
  const Eigen::Vector2d p = propagator * p0;
  return {p(0), p(1), 1.0 - p(0) - p(1)};
}

std::array<double, 3> rate_equations(double r_plus, double r_minus, double b,
                                     const std::array<double, 3>& p) {
  return {-r_minus * (1.0 + b) * p[0] + r_plus * p[1],
          -r_plus * (1.0 + b) * p[1] + r_minus * p[0],
          b * r_minus * p[0] + b * r_plus * p[1]};
}

std::array<double, 3> populations_rk4(double r_plus, double r_minus, double b,
                                      std::array<double, 3> p, double t, long n) {
  const double h = t / static_cast<double>(n);
  auto axpy = [](const std::array<double, 3>& x, double a, const std::array<double, 3>& k) {
    return std::array<double, 3>{x[0] + a * k[0], x[1] + a * k[1], x[2] + a * k[2]};
  };
  for (long i = 0; i < n; ++i) {
    const auto k1 = rate_equations(r_plus, r_minus, b, p);
    const auto k2 = rate_equations(r_plus, r_minus, b, axpy(p, h / 2, k1));
    const auto k3 = rate_equations(r_plus, r_minus, b, axpy(p, h / 2, k2));
    const auto k4 = rate_equations(r_plus, r_minus, b, axpy(p, h, k3));
    for (int j = 0; j < 3; ++j) p[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
  }
  return p;
}

long double matrix_element(long double gamma, long double eps0, long double hbar,
                           long double lambda, long double e, long double a0) {
  const long double pi = std::numbers::pi_v<long double>;
  const long double d2 = 2.0L * gamma * 3.0L * eps0 * hbar / (8.0L * pi * pi) * lambda * lambda *
                         lambda;
  return std::sqrt(d2) / (e * a0);
}

}  // namespace oracle
