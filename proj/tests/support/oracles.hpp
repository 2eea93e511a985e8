#pragma once

// Reference implementations used only by the tests. Each one is written
// independently of the library code it checks: scalar substitution in long
// double, a matrix exponential of the rate-equation generator, a plain RK4
// loop, and published Philox known-answer vectors.

#include <array>
#include <cstdint>

namespace oracle {

struct Field {
  long double detuning;  // rad/s
  long double rabi;      // rad/s
  long double plus;      // intensity fractions, summing to 1
  long double minus;
  long double pi;
};

long double stark(const Field& f);
long double rate_plus(const Field& f, long double gamma);
long double rate_minus(const Field& f, long double gamma);

/// (p_up, p_down, p_sink) at time t via exp(G t) of the 2x2 generator.
std::array<double, 3> populations_expm(double r_plus, double r_minus, double b, bool init_up,
                                       double t);

/// Fixed-step RK4 with n steps of the three-level system.
std::array<double, 3> populations_rk4(double r_plus, double r_minus, double b,
                                      std::array<double, 3> init, double t, long n);

/// Right-hand side of the rate equations with sink.
std::array<double, 3> rate_equations(double r_plus, double r_minus, double b,
                                     const std::array<double, 3>& p);

/// Dipole matrix element in e a0 from SI inputs.
long double matrix_element(long double gamma, long double eps0, long double hbar,
                           long double lambda, long double e, long double a0);

/// Philox4x32-10 known-answer vectors (Random123 kat_vectors).
struct PhiloxVector {
  std::array<std::uint32_t, 4> counter;
  std::array<std::uint32_t, 2> key;
  std::array<std::uint32_t, 4> expected;
};
inline constexpr std::array<PhiloxVector, 3> kPhiloxVectors{{
    {{0, 0, 0, 0}, {0, 0}, {0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}},
    {{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
     {0xffffffff, 0xffffffff},
     {0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}},
    {{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
     {0xa4093822, 0x299f31d0},
     {0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}},
}};

}  // namespace oracle
