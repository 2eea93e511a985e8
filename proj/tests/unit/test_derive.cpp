#include <doctest.h>

#include <cmath>

#include "iondyne/derive.hpp"
#include "iondyne/error.hpp"
#include "iondyne/physics.hpp"
#include "iondyne/units.hpp"

using namespace iondyne;

namespace {
const double kGamma = angular_from_mhz(21.57);
const double kB = 3.0 * (1.0 / 0.93572 - 1.0);
const double kResonance = angular_from_thz(755.2227);
const auto& kConstants = PhysicalConstantsTable::shipped();

RunEstimate run_at(int run, double detuning_ghz, double scale = 1.0) {
  const auto f = LaserField::from_weights(angular_from_ghz(detuning_ghz), angular_from_mhz(450), 0.985, 0.015, 0);
  const auto r = spin_flip_rates(f, kGamma);
  RunEstimate e;
  e.run = run;
  e.detuning_label = detuning_ghz < 0 ? "red" : "blue";
  e.optical_frequency = kResonance + f.detuning;
  e.side = detuning_ghz < 0 ? -1 : 1;
  e.stark = {scale * std::abs(stark_shift(f)), scale * 1e-4 * std::abs(stark_shift(f))};
  e.delta_r = {scale * r.delta(), scale * 0.01 * std::abs(r.delta())};
  e.leak_b = {kB, 0.008};
  return e;
}

ResonanceFit exact_resonance() {
  std::vector<ResonancePoint> points;
  for (const auto& e : {run_at(0, -12.03), run_at(1, 11.52)}) {
    points.push_back({e.optical_frequency, e.side, e.stark.value, e.stark.sigma, e.delta_r.value,
                      e.delta_r.sigma});
  }
  return fit_resonance(points);
}
}  // namespace

TEST_CASE("single consistent run passes the truth through") {
  ResonanceFit res;
  res.zero_crossing = kResonance;
  res.zero_crossing_uncertainty = 0.0;
  res.slope = 3.0 / kGamma;
  const auto out = derive_results({run_at(0, -12.03)}, res, CorrectionLedger{}, kConstants);
  // The detuning is recovered as a difference of optical frequencies, which
  // costs about 1e-11 relative.
  CHECK(out.gamma_ps.value == doctest::Approx(kGamma).epsilon(1e-10));
  CHECK(out.leak_b.value == doctest::Approx(kB).epsilon(1e-15));
  CHECK(out.ledger_shift == 0.0);
  CHECK_NOTHROW(out.check_identities());
  REQUIRE(out.runs.size() == 1);
}

TEST_CASE("common rescaling of rates and shifts changes nothing") {
  const auto res = exact_resonance();
  const auto a = derive_results({run_at(0, -12.03), run_at(1, 11.52)}, res, {}, kConstants);
  const auto b = derive_results({run_at(0, -12.03, 1.7), run_at(1, 11.52, 1.7)}, res, {}, kConstants);
  CHECK(b.gamma_ps.value == doctest::Approx(a.gamma_ps.value).epsilon(1e-12));
  CHECK(b.gamma_ps.sigma == doctest::Approx(a.gamma_ps.sigma).epsilon(1e-9));
}

TEST_CASE("ledger shift applies once, uncertainties add in quadrature") {
  const auto res = exact_resonance();
  CorrectionLedger ledger;
  ledger.add({"x", 0.002, 0.003});
  const auto plain = derive_results({run_at(0, -12.03), run_at(1, 11.52)}, res, {}, kConstants);
  const auto corrected = derive_results({run_at(0, -12.03), run_at(1, 11.52)}, res, ledger, kConstants);
  CHECK(corrected.gamma_ps.value == doctest::Approx(plain.gamma_ps.value * 1.002).epsilon(1e-14));
  CHECK(corrected.gamma_ps.relative() ==
        doctest::Approx(std::hypot(plain.gamma_ps.relative(), 0.003)).epsilon(1e-12));
}

TEST_CASE("resonance uncertainty propagates into the decay rate") {
  auto res = exact_resonance();
  res.zero_crossing_uncertainty = 0.0;
  const auto base = derive_results({run_at(0, -12.03), run_at(1, -12.03)}, res, {}, kConstants);
  res.zero_crossing_uncertainty = angular_from_mhz(21);
  const auto wide = derive_results({run_at(0, -12.03), run_at(1, -12.03)}, res, {}, kConstants);
  // all runs on one side: d gamma / d nu0 = -gamma / Delta
  const double extra = kGamma * angular_from_mhz(21) / angular_from_ghz(12.03);
  CHECK(wide.gamma_ps.sigma == doctest::Approx(std::hypot(base.gamma_ps.sigma, extra)).epsilon(1e-6));
}

TEST_CASE("input errors") {
  const auto res = exact_resonance();
  CHECK_THROWS_AS((void)derive_results({}, res, {}, kConstants), InputError);
  auto wrong_side = run_at(0, -12.03);
  wrong_side.side = 1;
  CHECK_THROWS_AS((void)derive_results({wrong_side}, res, {}, kConstants), InconsistentSignError);
  auto a = run_at(0, -12.03);
  auto b = run_at(1, 11.52);
  b.detuning_label = "red";  // same label, opposite side
  CHECK_THROWS_AS((void)derive_results({a, b}, res, {}, kConstants), InputError);
}

TEST_CASE("published inputs") {
  CorrectionLedger ledger;
  for (double u : {2.9, 1.6, 1.5, 0.5, 0.4, 0.2, 0.2, 0.1, 0.05, 0.05}) ledger.add({"row", 0.0, u * 1e-3});
  const Uncertain b{kB, 3.0 * 0.00025 / (0.93572 * 0.93572)};
  const auto out = derive_from_measured({kGamma, 0.0}, b, ledger, kConstants, true);
  CHECK(out.lifetime.value == doctest::Approx(6.904e-9).epsilon(0.005 / 6.904));
  CHECK(out.lifetime.sigma == doctest::Approx(0.026e-9).epsilon(0.05));
  CHECK(mhz_from_angular(out.gamma_pd.value) == doctest::Approx(1.482).epsilon(0.002 / 1.482));
  CHECK(out.branching_fraction.value == doctest::Approx(0.93572).epsilon(1e-12));
  CHECK(out.d_reduced.value == doctest::Approx(2.8928).epsilon(2e-3));
  CHECK(out.d_p32.value == std::sqrt(2.0) * out.d_reduced.value);
  CHECK(out.gamma_ps.value == kGamma);
  CHECK_FALSE(out.ledger_shift_applied);
  // first-order propagation versus the published 0.0043: consistent within 1.5x
  CHECK(out.d_reduced.sigma / 0.0043 < 1.5);
  CHECK(out.d_reduced.sigma / 0.0043 > 1.0 / 1.5);

  const auto shifted = derive_from_measured({kGamma, 0.0}, b, ledger, kConstants, false);
  CHECK(shifted.gamma_ps.value == kGamma);  // all shifts are zero in this ledger
  CHECK(shifted.ledger_shift_applied);
}

TEST_CASE("parenthesis notation") {
  CHECK(format_with_uncertainty(6.90424e-9 * 1e9, 0.025645) == "6.904(26)");
  CHECK(format_with_uncertainty(21.57, 0.0798) == "21.570(80)");
  CHECK(format_with_uncertainty(2.89155, 0.00536) == "2.8916(54)");
  CHECK(format_with_uncertainty(1234.3, 12.0) == "1234(12)");
  CHECK(format_with_uncertainty(0.93572, 0.00025) == "0.93572(25)");
  CHECK(format_with_uncertainty(5.0, 0.0) == "5");
}
