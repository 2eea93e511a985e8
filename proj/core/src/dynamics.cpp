#include "iondyne/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

namespace iondyne {

void PopulationState::validate() const {
  for (double p : {p_up, p_down, p_sink}) {
    if (!(p >= -kTolerance && p <= 1.0 + kTolerance)) {
      throw DomainError(fmt::format("population {} outside [0, 1]", p));
    }
  }
  if (std::abs(total() - 1.0) > kTolerance) {
    throw DomainError(fmt::format("populations sum to {}, not 1", total()));
  }
}

DynamicsParams::DynamicsParams(RatePair r, double b) : rates(r), leak_b(b) {
  if (!(r.r_plus >= 0.0) || !(r.r_minus >= 0.0)) throw DomainError("rates must be >= 0");
  if (!(b >= 0.0)) throw DomainError("leak factor must be >= 0");
  r_bar_ = (1.0 + b) * (r.r_minus + r.r_plus);
  const double dr = r.r_minus - r.r_plus;
  r_tilde_sq_ = (1.0 + b) * (1.0 + b) * dr * dr + 4.0 * r.r_minus * r.r_plus;
  r_tilde_ = std::sqrt(r_tilde_sq_);
}

namespace {

// e^{-r_bar t/2} cosh(x) and e^{-r_bar t/2} sinh(x)/r_tilde with x = r_tilde t/2,
// without overflow for large t and without 0/0 as r_tilde -> 0.
struct Propagator {
  double ch;
  double sh_over_rt;
};

Propagator propagator(const DynamicsParams& p, double t) {
  const double half_bar = 0.5 * p.r_bar() * t;
  const double x = 0.5 * p.r_tilde() * t;
  if (x < 0.5) {
    const double decay = std::exp(-half_bar);
    const double sinhc = x < 1e-4 ? 1.0 + x * x / 6.0 : std::sinh(x) / x;
    return {decay * std::cosh(x), decay * 0.5 * t * sinhc};
  }
  // r_tilde <= r_bar, so both exponents are <= 0.
  const double slow = std::exp(x - half_bar);
  const double fast = std::exp(-x - half_bar);
  return {0.5 * (slow + fast), 0.5 * (slow - fast) / p.r_tilde()};
}

void require_time(double t) {
  if (!(t >= 0.0)) throw DomainError("evolution time must be >= 0");
}

}  // namespace

double p_up_analytic(const DynamicsParams& params, Spin init, double t) {
  require_time(t);
  const auto [ch, sh] = propagator(params, t);
  const auto& r = params.rates;
  if (init == Spin::up) {
    return ch - (1.0 + params.leak_b) * r.delta() * sh;
  }
  return 2.0 * r.r_plus * sh;
}

PopulationState evolve_analytic(const DynamicsParams& params, Spin init, double t) {
  require_time(t);
  const auto [ch, sh] = propagator(params, t);
  const auto& r = params.rates;
  const double growth = (1.0 + params.leak_b) * r.delta() * sh;
  PopulationState s;
  if (init == Spin::up) {
    s.p_up = ch - growth;
    s.p_down = 2.0 * r.r_minus * sh;
  } else {
    // Mirror of the up solution: R_+ <-> R_- and labels swapped.
    s.p_down = ch + growth;
    s.p_up = 2.0 * r.r_plus * sh;
  }
  s.p_sink = std::max(0.0, 1.0 - s.p_up - s.p_down);
  return s;
}

namespace {

using State = std::array<double, 3>;

State derivative(const DynamicsParams& p, const State& y) {
  const double rp = p.rates.r_plus;
  const double rm = p.rates.r_minus;
  const double b = p.leak_b;
  return {-rm * (1.0 + b) * y[0] + rp * y[1],  //
          -rp * (1.0 + b) * y[1] + rm * y[0],  //
          b * rm * y[0] + b * rp * y[1]};
}

State axpy(const State& y, double h, const State& k) {
  return {y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]};
}

State integrate_rk4(const DynamicsParams& p, State y, double t, long steps) {
  const double h = t / static_cast<double>(steps);
  for (long i = 0; i < steps; ++i) {
    const State k1 = derivative(p, y);
    const State k2 = derivative(p, axpy(y, 0.5 * h, k1));
    const State k3 = derivative(p, axpy(y, 0.5 * h, k2));
    const State k4 = derivative(p, axpy(y, h, k3));
    for (int j = 0; j < 3; ++j) {
      y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
  }
  return y;
}

PopulationState to_population(const State& y) { return {y[0], y[1], y[2]}; }

}  // namespace

PopulationState evolve_numeric(const DynamicsParams& params, const PopulationState& init,
                               double t, double rel_tol, const NumericOptions& options) {
  require_time(t);
  if (!(rel_tol >= 1e-14 && rel_tol <= 1e-6)) {
    throw DomainError("rel_tol must lie in [1e-14, 1e-6]");
  }
  init.validate();
  const State y0{init.p_up, init.p_down, init.p_sink};
  if (t == 0.0) return init;

  // Start near h * r_bar = 0.5; the generator's spectral radius is <= r_bar.
  long steps = std::max(1L, static_cast<long>(std::ceil(2.0 * params.r_bar() * t)));
  State coarse = integrate_rk4(params, y0, t, steps);
  while (true) {
    if (2 * steps > options.max_steps) {
      throw IntegrationError(
          fmt::format("RK4 refinement did not reach rel_tol {} within {} steps", rel_tol,
                      options.max_steps),
          to_population(coarse), to_population(integrate_rk4(params, y0, t, steps)));
    }
    steps *= 2;
    const State fine = integrate_rk4(params, y0, t, steps);
    double diff = 0.0;
    double scale = 0.0;
    for (int j = 0; j < 3; ++j) {
      diff = std::max(diff, std::abs(fine[j] - coarse[j]));
      scale = std::max(scale, std::abs(fine[j]));
    }
    if (diff <= rel_tol * scale) {
      State out;
      for (int j = 0; j < 3; ++j) out[j] = fine[j] + (fine[j] - coarse[j]) / 15.0;
      return to_population(out);
    }
    coarse = fine;
  }
}

EchoSample spin_echo_signal(double stark, double pulse_t, double contrast, double offset,
                            double phase, double decay_rate) {
  if (!(contrast >= 0.0 && contrast <= 0.5)) throw DomainError("contrast must lie in [0, 0.5]");
  if (!(offset >= 0.0 && offset <= 1.0)) throw DomainError("offset must lie in [0, 1]");
  if (!(pulse_t >= 0.0)) throw DomainError("pulse duration must be >= 0");
  if (!(decay_rate >= 0.0)) throw DomainError("decay rate must be >= 0");
  const double raw =
      offset + contrast * std::exp(-decay_rate * pulse_t) * std::cos(stark * pulse_t + phase);
  EchoSample s;
  s.valid = raw >= 0.0 && raw <= 1.0;
  s.value = std::clamp(raw, 0.0, 1.0);
  return s;
}

}  // namespace iondyne
