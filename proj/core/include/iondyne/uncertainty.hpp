#pragma once

#include <cmath>
#include <span>
#include <string_view>

#include "iondyne/constants.hpp"

namespace iondyne {

/// Value with a standard uncertainty.
struct Uncertain {
  double value = 0.0;
  double sigma = 0.0;

  [[nodiscard]] double relative() const { return value != 0.0 ? sigma / std::abs(value) : 0.0; }
};

/// Formulas known to the first-order propagator. Inputs, in order:
///   product        (a, b)             a b
///   quotient       (a, b)             a / b
///   power          (a)                a^exponent
///   closure        (Delta, dR, Delta_S)  3 Delta dR / Delta_S
///   matrix_element (gamma_ps)         D in e a0 (needs constants)
///   lifetime       (gamma_ps, b)      1 / (gamma_ps (1 + b/3))
///   branching      (b)                1 / (1 + b/3)
///   gamma_pd       (gamma_ps, b)      b gamma_ps / 3
///   quadrature     (x_1 .. x_n)       sqrt(sum x_i^2)
enum class Formula {
  product,
  quotient,
  power,
  closure,
  matrix_element,
  lifetime,
  branching,
  gamma_pd,
  quadrature,
};

/// Throws InputError for an unknown tag.
[[nodiscard]] Formula formula_from_tag(std::string_view tag);

struct PropagationContext {
  double exponent = 1.0;                             // for `power`
  const PhysicalConstantsTable* constants = nullptr;  // for `matrix_element`
};

/// Linearized propagation: sigma_f^2 = sum_i (df/dx_i)^2 sigma_i^2 with the
/// partial derivatives written out per formula; inputs are treated as
/// uncorrelated.
[[nodiscard]] Uncertain propagate_uncertainty(Formula formula, std::span<const Uncertain> inputs,
                                              const PropagationContext& context = {});
[[nodiscard]] Uncertain propagate_uncertainty(std::string_view tag,
                                              std::span<const Uncertain> inputs,
                                              const PropagationContext& context = {});

/// sqrt(sum x_i^2) of plain numbers.
[[nodiscard]] double quadrature(std::span<const double> values);

}  // namespace iondyne
