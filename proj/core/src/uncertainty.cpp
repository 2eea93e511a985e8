#include "iondyne/uncertainty.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "iondyne/error.hpp"
#include "iondyne/physics.hpp"

namespace iondyne {

Formula formula_from_tag(std::string_view tag) {
  if (tag == "product") return Formula::product;
  if (tag == "quotient") return Formula::quotient;
  if (tag == "power") return Formula::power;
  if (tag == "closure") return Formula::closure;
  if (tag == "matrix_element") return Formula::matrix_element;
  if (tag == "lifetime") return Formula::lifetime;
  if (tag == "branching") return Formula::branching;
  if (tag == "gamma_pd") return Formula::gamma_pd;
  if (tag == "quadrature") return Formula::quadrature;
  throw InputError("unknown formula tag '" + std::string(tag) + "'");
}

double quadrature(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

namespace {

void require_arity(std::span<const Uncertain> in, std::size_t n, const char* name) {
  if (in.size() != n) {
    throw InputError(std::string(name) + " expects " + std::to_string(n) + " inputs");
  }
}

Uncertain combine(double value, std::initializer_list<std::pair<double, double>> partials) {
  double var = 0.0;
  for (const auto& [derivative, sigma] : partials) var += derivative * derivative * sigma * sigma;
  return {value, std::sqrt(var)};
}

}  // namespace

Uncertain propagate_uncertainty(Formula formula, std::span<const Uncertain> in,
                                const PropagationContext& context) {
  for (const auto& x : in) {
    if (!(x.sigma >= 0.0)) throw DomainError("uncertainties must be >= 0");
  }
  switch (formula) {
    case Formula::product: {
      require_arity(in, 2, "product");
      const auto& [a, sa] = in[0];
      const auto& [b, sb] = in[1];
      return combine(a * b, {{b, sa}, {a, sb}});
    }
    case Formula::quotient: {
      require_arity(in, 2, "quotient");
      const auto& [a, sa] = in[0];
      const auto& [b, sb] = in[1];
      if (b == 0.0) throw DomainError("quotient by zero");
      return combine(a / b, {{1.0 / b, sa}, {-a / (b * b), sb}});
    }
    case Formula::power: {
      require_arity(in, 1, "power");
      const auto& [a, sa] = in[0];
      const double p = context.exponent;
      return combine(std::pow(a, p), {{p * std::pow(a, p - 1.0), sa}});
    }
    case Formula::closure: {
      require_arity(in, 3, "closure");
      const auto& [d, sd] = in[0];
      const auto& [r, sr] = in[1];
      const auto& [s, ss] = in[2];
      const double g = closure_gamma_ps(d, r, s);
      return combine(g, {{3.0 * r / s, sd}, {3.0 * d / s, sr}, {-g / s, ss}});
    }
    case Formula::matrix_element: {
      require_arity(in, 1, "matrix_element");
      if (context.constants == nullptr) throw InputError("matrix_element needs constants");
      const auto& [g, sg] = in[0];
      const double d = matrix_element(g, *context.constants);
      // D ~ sqrt(gamma): dD/dgamma = D / (2 gamma).
      return combine(d, {{d / (2.0 * g), sg}});
    }
    case Formula::lifetime: {
      require_arity(in, 2, "lifetime");
      const auto& [g, sg] = in[0];
      const auto& [b, sb] = in[1];
      const double k = 1.0 + b / 3.0;
      const double tau = 1.0 / (g * k);
      return combine(tau, {{-tau / g, sg}, {-tau / (3.0 * k), sb}});
    }
    case Formula::branching: {
      require_arity(in, 1, "branching");
      const auto& [b, sb] = in[0];
      const double k = 1.0 + b / 3.0;
      return combine(1.0 / k, {{-1.0 / (3.0 * k * k), sb}});
    }
    case Formula::gamma_pd: {
      require_arity(in, 2, "gamma_pd");
      const auto& [g, sg] = in[0];
      const auto& [b, sb] = in[1];
      return combine(b * g / 3.0, {{b / 3.0, sg}, {g / 3.0, sb}});
    }
    case Formula::quadrature: {
      double sum = 0.0;
      for (const auto& x : in) sum += x.value * x.value;
      const double q = std::sqrt(sum);
      double var = 0.0;
      if (q > 0.0) {
        for (const auto& x : in) var += (x.value / q) * (x.value / q) * x.sigma * x.sigma;
      }
      return {q, std::sqrt(var)};
    }
  }
  throw InputError("unknown formula");
}

Uncertain propagate_uncertainty(std::string_view tag, std::span<const Uncertain> inputs,
                                const PropagationContext& context) {
  return propagate_uncertainty(formula_from_tag(tag), inputs, context);
}

}  // namespace iondyne
