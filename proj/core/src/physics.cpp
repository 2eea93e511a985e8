#include "iondyne/physics.hpp"

#include <cmath>
#include <string>

#include "iondyne/error.hpp"
#include "iondyne/units.hpp"

namespace iondyne {
namespace {

void require_detuned(double detuning) {
  if (detuning == 0.0) throw DomainError("on-resonance shift undefined in this model");
  if (!std::isfinite(detuning)) throw DomainError("detuning must be finite");
}

}  // namespace

LaserField LaserField::from_weights(double detuning, double rabi, double w_plus, double w_minus,
                                    double w_pi) {
  if (w_plus < 0.0 || w_minus < 0.0 || w_pi < 0.0) {
    throw DomainError("polarization weights must be non-negative");
  }
  const double total = w_plus + w_minus + w_pi;
  if (!(total > 0.0)) throw DomainError("polarization weights sum to zero");
  LaserField field{detuning, rabi, std::sqrt(w_plus / total), std::sqrt(w_minus / total),
                   std::sqrt(w_pi / total)};
  field.validate();
  return field;
}

void LaserField::validate() const {
  if (!(rabi >= 0.0) || !std::isfinite(rabi)) throw DomainError("rabi frequency must be >= 0");
  if (eps_plus < 0.0 || eps_minus < 0.0 || eps_pi < 0.0) {
    throw DomainError("polarization amplitudes must be >= 0");
  }
  const double norm = plus_fraction() + minus_fraction() + pi_fraction();
  if (std::abs(norm - 1.0) > kNormalizationTolerance) {
    throw DomainError("polarization amplitudes are not normalized (sum of squares = " +
                      std::to_string(norm) + ")");
  }
}

DecayConstants DecayConstants::from_gamma_and_leak(double gamma_ps, double leak_b) {
  DecayConstants d{gamma_ps, leak_b * gamma_ps / 3.0, leak_b};
  d.validate();
  return d;
}

DecayConstants DecayConstants::from_gamma_and_branching(double gamma_ps, double branching) {
  if (!(branching > 0.0 && branching <= 1.0)) {
    throw DomainError("branching fraction must lie in (0, 1]");
  }
  return from_gamma_and_leak(gamma_ps, 3.0 * (1.0 / branching - 1.0));
}

void DecayConstants::validate() const {
  if (!(gamma_ps > 0.0)) throw DomainError("gamma_ps must be positive");
  if (!(gamma_pd >= 0.0)) throw DomainError("gamma_pd must be non-negative");
  if (std::abs(leak_b - 3.0 * gamma_pd / gamma_ps) > 1e-12 * std::max(1.0, leak_b)) {
    throw DomainError("leak_b inconsistent with 3 gamma_pd / gamma_ps");
  }
}

double stark_shift(const LaserField& field) {
  require_detuned(field.detuning);
  const double saturation = field.rabi * field.rabi / (4.0 * field.detuning);
  return saturation * (field.minus_fraction() - field.plus_fraction()) / 3.0;
}

RatePair spin_flip_rates(const LaserField& field, double gamma_ps) {
  require_detuned(field.detuning);
  if (!(gamma_ps > 0.0)) throw DomainError("gamma_ps must be positive");
  const double scale =
      gamma_ps / 9.0 * field.rabi * field.rabi / (4.0 * field.detuning * field.detuning);
  return {scale * (field.plus_fraction() + field.pi_fraction()),
          scale * (field.minus_fraction() + field.pi_fraction())};
}

LeakRates leak_rates(const RatePair& rates, double leak_b) {
  if (!(leak_b >= 0.0)) throw DomainError("leak factor must be >= 0");
  if (rates.r_plus < 0.0 || rates.r_minus < 0.0) throw DomainError("rates must be >= 0");
  return {leak_b * rates.r_minus, leak_b * rates.r_plus};
}

LeakRates leak_rates(const LaserField& field, const RatePair& rates, double leak_b,
                     double max_pi_fraction) {
  if (field.pi_fraction() > max_pi_fraction) {
    throw DomainError("leak model requires negligible pi polarization (fraction " +
                      std::to_string(field.pi_fraction()) + " exceeds " +
                      std::to_string(max_pi_fraction) + ")");
  }
  return leak_rates(rates, leak_b);
}

double closure_gamma_ps(double detuning, double delta_r, double stark) {
  if (stark == 0.0) throw DomainError("stark shift is zero; decay rate undefined");
  const double gamma = 3.0 * detuning * delta_r / stark;
  if (gamma < 0.0) {
    throw InconsistentSignError(
        "inconsistent sign: 3 * detuning * delta_r / stark is negative (detuning, delta_r and "
        "stark shift signs disagree)");
  }
  return gamma;
}

double matrix_element(double gamma_ps, const PhysicalConstantsTable& constants) {
  if (!(gamma_ps > 0.0)) throw DomainError("gamma_ps must be positive");
  const double lambda3 = constants.lambda_ps * constants.lambda_ps * constants.lambda_ps;
  const double d_squared = 2.0 * gamma_ps * 3.0 * constants.vacuum_permittivity * constants.hbar *
                           lambda3 / (8.0 * kPi * kPi);
  return std::sqrt(d_squared) / constants.dipole_atomic_unit();
}

}  // namespace iondyne
