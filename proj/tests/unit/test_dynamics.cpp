#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "iondyne/dynamics.hpp"
#include "iondyne/error.hpp"
#include "oracles.hpp"

using namespace iondyne;

namespace {
double max_diff(const PopulationState& a, const std::array<double, 3>& b) {
  return std::max({std::abs(a.p_up - b[0]), std::abs(a.p_down - b[1]), std::abs(a.p_sink - b[2])});
}
double max_diff(const PopulationState& a, const PopulationState& b) {
  return max_diff(a, std::array<double, 3>{b.p_up, b.p_down, b.p_sink});
}
}  // namespace

TEST_CASE("derived rates") {
  const DynamicsParams p(RatePair{3000.0, 60.0}, 0.206);
  CHECK(p.r_bar() == doctest::Approx(1.206 * 3060.0));
  const double naive = p.r_bar() * p.r_bar() - 4 * 0.206 * 2.206 * 3000.0 * 60.0;
  CHECK(p.r_tilde_squared() == doctest::Approx(naive).epsilon(1e-12));
  CHECK(p.r_tilde() == doctest::Approx(std::sqrt(naive)).epsilon(1e-12));
  CHECK_THROWS_AS(DynamicsParams(RatePair{-1.0, 1.0}, 0.1), DomainError);
  CHECK_THROWS_AS(DynamicsParams(RatePair{1.0, 1.0}, -0.1), DomainError);
}

TEST_CASE("analytic solution") {
  SUBCASE("initial conditions") {
    const DynamicsParams p(RatePair{500.0, 40.0}, 0.3);
    const auto u = evolve_analytic(p, Spin::up, 0.0);
    const auto d = evolve_analytic(p, Spin::down, 0.0);
    CHECK(u.p_up == 1.0);
    CHECK(u.p_down == 0.0);
    CHECK(u.p_sink == 0.0);
    CHECK(d.p_up == 0.0);
    CHECK(d.p_down == 1.0);
  }
  SUBCASE("closed system relaxes to the detailed-balance steady state") {
    const double rp = 700.0;
    const double rm = 300.0;
    const DynamicsParams p(RatePair{rp, rm}, 0.0);
    const auto s = evolve_analytic(p, Spin::up, 50.0 / p.r_bar());
    CHECK(s.p_up == doctest::Approx(rp / (rp + rm)).epsilon(1e-12));
    CHECK(s.p_down == doctest::Approx(rm / (rp + rm)).epsilon(1e-12));
    CHECK(std::abs(s.p_sink) < 1e-12);
  }
  SUBCASE("matches the matrix-exponential oracle") {
    const DynamicsParams p(RatePair{3000.0, 60.0}, 0.206);
    for (double t : {1e-6, 1e-4, 5e-4, 2e-3}) {
      for (Spin s : {Spin::up, Spin::down}) {
        const auto a = evolve_analytic(p, s, t);
        CHECK(max_diff(a, oracle::populations_expm(3000.0, 60.0, 0.206, s == Spin::up, t)) < 1e-13);
        CHECK(p_up_analytic(p, s, t) == a.p_up);
      }
    }
  }
  SUBCASE("matches the RK4 integrator at the reference point") {
    const DynamicsParams p(RatePair{3000.0, 60.0}, 0.206);
    const auto a = evolve_analytic(p, Spin::down, 500e-6);
    const auto n = evolve_numeric(p, PopulationState::prepared(Spin::down), 500e-6, 1e-12);
    CHECK(max_diff(a, n) < 1e-9);
  }
  SUBCASE("negative time is rejected") {
    const DynamicsParams p(RatePair{1.0, 1.0}, 0.0);
    CHECK_THROWS_AS((void)evolve_analytic(p, Spin::up, -1e-9), DomainError);
  }
  SUBCASE("extreme times stay finite") {
    const DynamicsParams p(RatePair{1e5, 1.0}, 1.0);
    const auto s = evolve_analytic(p, Spin::up, 1.0);
    CHECK(std::isfinite(s.p_up));
    CHECK(s.p_sink <= 1.0);
  }
}

TEST_CASE("numeric integration") {
  SUBCASE("null generator leaves the state unchanged") {
    const DynamicsParams p(RatePair{0.0, 0.0}, 0.5);
    const PopulationState init{0.3, 0.6, 0.1};
    const auto s = evolve_numeric(p, init, 1.0, 1e-10);
    CHECK(s.p_up == init.p_up);
    CHECK(s.p_down == init.p_down);
    CHECK(s.p_sink == init.p_sink);
  }
  SUBCASE("conserves spin population without a leak") {
    const DynamicsParams p(RatePair{1234.0, 321.0}, 0.0);
    for (double t : {1e-4, 1e-3, 1e-2}) {
      const auto s = evolve_numeric(p, PopulationState::prepared(Spin::up), t, 1e-10);
      CHECK(std::abs(s.p_up + s.p_down - 1.0) < 1e-10);
    }
  }
  SUBCASE("agrees with a plain fine-step RK4 loop") {
    const DynamicsParams p(RatePair{800.0, 90.0}, 0.4);
    const auto s = evolve_numeric(p, PopulationState::prepared(Spin::up), 3e-3, 1e-12);
    CHECK(max_diff(s, oracle::populations_rk4(800.0, 90.0, 0.4, {1, 0, 0}, 3e-3, 20000)) < 1e-12);
  }
  SUBCASE("argument checks") {
    const DynamicsParams p(RatePair{1.0, 1.0}, 0.0);
    const auto up = PopulationState::prepared(Spin::up);
    CHECK_THROWS_AS((void)evolve_numeric(p, up, 1.0, 1e-15), DomainError);
    CHECK_THROWS_AS((void)evolve_numeric(p, up, 1.0, 1e-5), DomainError);
    CHECK_THROWS_AS((void)evolve_numeric(p, up, -1.0, 1e-9), DomainError);
    CHECK_THROWS_AS((void)evolve_numeric(p, PopulationState{0.5, 0.6, 0.0}, 1.0, 1e-9), DomainError);
  }
  SUBCASE("a too small step budget reports both refinements") {
    const DynamicsParams p(RatePair{1e5, 1e5}, 1.0);
    NumericOptions options;
    options.max_steps = 64;
    try {
      (void)evolve_numeric(p, PopulationState::prepared(Spin::up), 1e-3, 1e-14, options);
      FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
      CHECK(std::isfinite(e.coarse().p_up));
      CHECK(std::isfinite(e.fine().p_up));
    }
  }
}

TEST_CASE("spin echo signal") {
  const double w = 2 * M_PI * 1e6;
  CHECK(spin_echo_signal(w, 0.0, 0.4, 0.5, 0.0, 0.0).value == doctest::Approx(0.9));
  CHECK(spin_echo_signal(w, 0.5e-6, 0.4, 0.5, 0.0, 0.0).value == doctest::Approx(0.1));
  CHECK(spin_echo_signal(w, 0.25e-6, 0.0, 0.3, 0.0, 0.0).value == doctest::Approx(0.3));
  const auto clipped = spin_echo_signal(w, 0.0, 0.5, 0.9, 0.0, 0.0);
  CHECK(clipped.value == 1.0);
  CHECK_FALSE(clipped.valid);
  CHECK(spin_echo_signal(w, 1e-6, 0.4, 0.5, 0.0, 1e6).value ==
        doctest::Approx(0.5 + 0.4 * std::exp(-1.0)));
  CHECK_THROWS_AS((void)spin_echo_signal(w, 0.0, 0.6, 0.5, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS((void)spin_echo_signal(w, -1.0, 0.4, 0.5, 0.0, 0.0), DomainError);
}
