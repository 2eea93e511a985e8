#pragma once

#include "iondyne/constants.hpp"

// Closed-form light-ion interaction in the far-detuned regime |detuning| >>
// Rabi frequency, decay rate: differential ac Stark shift between the two
// ground Zeeman levels, Raman spin-flip rates, leak into the D3/2 sink, and
// the relation that recovers the P1/2 -> S1/2 decay rate from the shift and
// the flip-rate difference.

namespace iondyne {

enum class Spin { up, down };

/// Off-resonant beam. Detuning is laser minus resonance (red is negative),
/// both frequencies angular. The polarization amplitudes obey
/// eps_plus^2 + eps_minus^2 + eps_pi^2 = 1, so `rabi` is the only intensity
/// scale.
struct LaserField {
  double detuning = 0.0;  // rad/s
  double rabi = 0.0;      // rad/s
  double eps_plus = 0.0;
  double eps_minus = 0.0;
  double eps_pi = 0.0;

  static constexpr double kNormalizationTolerance = 1e-12;

  /// Build from non-negative intensity weights of the sigma+, sigma-, pi
  /// components; the weights are normalized to unit sum.
  static LaserField from_weights(double detuning, double rabi, double w_plus, double w_minus,
                                 double w_pi);

  /// Throws DomainError if any field invariant is broken.
  void validate() const;

  [[nodiscard]] double plus_fraction() const { return eps_plus * eps_plus; }
  [[nodiscard]] double minus_fraction() const { return eps_minus * eps_minus; }
  [[nodiscard]] double pi_fraction() const { return eps_pi * eps_pi; }
};

struct DecayConstants {
  double gamma_ps = 0.0;  // P1/2 -> S1/2, rad/s
  double gamma_pd = 0.0;  // P1/2 -> D3/2, rad/s
  double leak_b = 0.0;    // 3 gamma_pd / gamma_ps

  static DecayConstants from_gamma_and_leak(double gamma_ps, double leak_b);
  /// Branching fraction 1 / (1 + b/3) back to S1/2.
  static DecayConstants from_gamma_and_branching(double gamma_ps, double branching);

  void validate() const;
  [[nodiscard]] double branching_fraction() const { return 1.0 / (1.0 + leak_b / 3.0); }
  [[nodiscard]] double lifetime() const { return 1.0 / (gamma_ps + gamma_pd); }
};

/// Spin-flip rates in 1/s. r_plus flips down -> up, r_minus flips up -> down.
struct RatePair {
  double r_plus = 0.0;
  double r_minus = 0.0;

  /// r_minus - r_plus
  [[nodiscard]] double delta() const { return r_minus - r_plus; }
};

/// Rates at which up and down are pumped into the metastable sink.
struct LeakRates {
  double from_up = 0.0;
  double from_down = 0.0;
};

/// Largest pi-polarized intensity fraction for which the leak model (which
/// neglects pi light) is accepted in pipeline context.
inline constexpr double kDefaultMaxPiFraction = 1e-2;

/// Differential ac Stark shift (rad/s), (1/3) Omega^2 / (4 Delta) (eps-^2 - eps+^2).
[[nodiscard]] double stark_shift(const LaserField& field);

/// Raman spin-flip rates gamma_ps (eps_q^2 + eps_pi^2)/9 * Omega^2/(4 Delta^2).
[[nodiscard]] RatePair spin_flip_rates(const LaserField& field, double gamma_ps);

/// Sink rates: up leaks at b R_-, down leaks at b R_+.
[[nodiscard]] LeakRates leak_rates(const RatePair& rates, double leak_b);

/// Pipeline form: refuses fields with more pi light than `max_pi_fraction`.
[[nodiscard]] LeakRates leak_rates(const LaserField& field, const RatePair& rates, double leak_b,
                                   double max_pi_fraction = kDefaultMaxPiFraction);

/// gamma_ps = 3 Delta dR / Delta_S.
///
/// Throws DomainError for a zero shift and InconsistentSignError when the
/// signs of the inputs imply a negative decay rate.
[[nodiscard]] double closure_gamma_ps(double detuning, double delta_r, double stark);

/// Reduced dipole matrix element <S1/2||d||P1/2> in units of e a0 from the
/// decay rate: D^2 = 2 gamma 3 eps0 hbar lambda^3 / (8 pi^2).
[[nodiscard]] double matrix_element(double gamma_ps, const PhysicalConstantsTable& constants);

}  // namespace iondyne
