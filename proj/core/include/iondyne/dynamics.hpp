#pragma once

#include <array>

#include "iondyne/error.hpp"
#include "iondyne/physics.hpp"

namespace iondyne {

/// Occupations of the two ground Zeeman levels and the metastable sink.
struct PopulationState {
  double p_up = 0.0;
  double p_down = 0.0;
  double p_sink = 0.0;

  static constexpr double kTolerance = 1e-9;

  static PopulationState prepared(Spin spin) {
    return spin == Spin::up ? PopulationState{1.0, 0.0, 0.0} : PopulationState{0.0, 1.0, 0.0};
  }
  [[nodiscard]] double total() const { return p_up + p_down + p_sink; }
  /// Throws DomainError unless each entry is in [0,1] and the sum is 1 (1e-9).
  void validate() const;
};

/// Rates and leak factor for the spin-flip rate equations
///
///   dp_up/dt   = -R_-(1+b) p_up   + R_+ p_down
///   dp_down/dt = -R_+(1+b) p_down + R_- p_up
///   dp_sink/dt =  b R_- p_up + b R_+ p_down
struct DynamicsParams {
  RatePair rates;
  double leak_b = 0.0;

  DynamicsParams() = default;
  DynamicsParams(RatePair r, double b);

  /// (1+b)(R_- + R_+)
  [[nodiscard]] double r_bar() const { return r_bar_; }
  /// sqrt(r_bar^2 - 4 b (2+b) R_- R_+)
  [[nodiscard]] double r_tilde() const { return r_tilde_; }
  /// r_bar^2 - 4 b (2+b) R_- R_+, evaluated in the cancellation-free form
  /// (1+b)^2 dR^2 + 4 R_- R_+.
  [[nodiscard]] double r_tilde_squared() const { return r_tilde_sq_; }

 private:
  double r_bar_ = 0.0;
  double r_tilde_sq_ = 0.0;
  double r_tilde_ = 0.0;
};

/// Closed-form populations at time t (s) after preparing `init`.
[[nodiscard]] PopulationState evolve_analytic(const DynamicsParams& params, Spin init, double t);

/// Dark-count-relevant subset: p_up only. Same algebra as evolve_analytic,
/// kept separate because it sits in the likelihood inner loop.
[[nodiscard]] double p_up_analytic(const DynamicsParams& params, Spin init, double t);

/// Thrown when step halving does not converge within the step budget; holds
/// the last two refinements.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, PopulationState coarse, PopulationState fine)
      : Error(what), coarse_(coarse), fine_(fine) {}
  [[nodiscard]] const char* kind() const noexcept override { return "integration"; }
  [[nodiscard]] const PopulationState& coarse() const { return coarse_; }
  [[nodiscard]] const PopulationState& fine() const { return fine_; }

 private:
  PopulationState coarse_;
  PopulationState fine_;
};

struct NumericOptions {
  /// Largest number of RK4 steps tried before giving up.
  long max_steps = 1L << 22;
};

/// Fixed-step classical RK4 of the rate equations with step halving until
/// two successive solutions agree within rel_tol (max-norm relative to the
/// finer solution); the result is Richardson-extrapolated from those two.
/// rel_tol must lie in [1e-14, 1e-6].
[[nodiscard]] PopulationState evolve_numeric(const DynamicsParams& params,
                                             const PopulationState& init, double t,
                                             double rel_tol, const NumericOptions& options = {});

struct EchoSample {
  double value = 0.0;  // clamped to [0, 1]
  bool valid = true;   // false when the unclamped value left [0, 1]
};

/// Spin-echo dark-event probability after a shift pulse of length pulse_t:
/// offset + contrast exp(-decay_rate t) cos(stark t + phase).
[[nodiscard]] EchoSample spin_echo_signal(double stark, double pulse_t, double contrast,
                                          double offset, double phase, double decay_rate);

}  // namespace iondyne
