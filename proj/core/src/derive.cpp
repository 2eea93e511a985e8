#include "iondyne/derive.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>

#include "iondyne/error.hpp"
#include "iondyne/physics.hpp"

namespace iondyne {
namespace {

Uncertain weighted_mean(const std::vector<Uncertain>& xs, const char* what) {
  double sw = 0.0, swx = 0.0;
  for (const auto& x : xs) {
    if (!(x.sigma > 0.0)) {
      throw InputError(fmt::format("{}: every run needs a positive uncertainty", what));
    }
    const double w = 1.0 / (x.sigma * x.sigma);
    sw += w;
    swx += w * x.value;
  }
  return {swx / sw, 1.0 / std::sqrt(sw)};
}

FinalResults finalize(double gamma_raw, double stat_rel, const Uncertain& leak_b,
                      const CorrectionLedger& ledger, const PhysicalConstantsTable& constants,
                      bool apply_shift) {
  if (!(gamma_raw > 0.0)) throw InconsistentSignError("derived gamma_ps is not positive");
  FinalResults r;
  r.gamma_ps_raw = gamma_raw;
  r.statistical_relative = stat_rel;
  r.ledger_shift = ledger.total_shift();
  r.ledger_relative = ledger.total_uncertainty();
  r.ledger_shift_applied = apply_shift;

  const double gamma = apply_shift ? gamma_raw * (1.0 + r.ledger_shift) : gamma_raw;
  const double rel = std::hypot(stat_rel, r.ledger_relative);
  r.gamma_ps = {gamma, gamma * rel};
  r.leak_b = leak_b;

  const Uncertain gb[] = {r.gamma_ps, leak_b};
  r.gamma_pd = propagate_uncertainty(Formula::gamma_pd, gb);
  r.lifetime = propagate_uncertainty(Formula::lifetime, gb);
  r.branching_fraction = propagate_uncertainty(Formula::branching, {&leak_b, 1});
  PropagationContext ctx;
  ctx.constants = &constants;
  r.d_reduced = propagate_uncertainty(Formula::matrix_element, {&r.gamma_ps, 1}, ctx);
  r.d_p32 = {std::sqrt(2.0) * r.d_reduced.value, std::sqrt(2.0) * r.d_reduced.sigma};
  r.check_identities();
  return r;
}

}  // namespace

void FinalResults::check_identities() const {
  const double b = leak_b.value;
  auto close = [](double a, double e) { return std::abs(a - e) <= 1e-12 * std::abs(e); };
  if (!close(branching_fraction.value, 1.0 / (1.0 + b / 3.0))) {
    throw Error("branching fraction inconsistent with leak factor");
  }
  if (!close(1.0 / lifetime.value, gamma_ps.value * (1.0 + b / 3.0))) {
    throw Error("lifetime inconsistent with gamma_ps and leak factor");
  }
  if (d_p32.value != std::sqrt(2.0) * d_reduced.value) {
    throw Error("P3/2 matrix element is not sqrt(2) times the P1/2 element");
  }
}

FinalResults derive_results(const std::vector<RunEstimate>& estimates,
                            const ResonanceFit& resonance, const CorrectionLedger& ledger,
                            const PhysicalConstantsTable& constants) {
  if (estimates.empty()) throw InputError("derive: no run estimates");

  std::map<std::string, int> side_of_label;
  for (const auto& e : estimates) {
    auto [it, inserted] = side_of_label.emplace(e.detuning_label, e.side);
    if (!inserted && it->second != e.side) {
      throw InputError("derive: detuning label '" + e.detuning_label +
                       "' used with both detuning signs");
    }
    if (e.side != 1 && e.side != -1) throw InputError("derive: run side must be +1 or -1");
  }

  std::vector<RunDecayRate> runs;
  std::vector<Uncertain> gammas;
  for (const auto& e : estimates) {
    const double detuning = e.optical_frequency - resonance.zero_crossing;
    if ((detuning > 0.0 ? 1 : -1) != e.side) {
      throw InconsistentSignError(fmt::format(
          "inconsistent sign: run {} ('{}') lies on the {} side of the fitted resonance", e.run,
          e.detuning_label, detuning > 0.0 ? "blue" : "red"));
    }
    if (e.delta_r.value == 0.0) throw InputError("derive: run with zero delta_r");
    const double sign_dr = e.delta_r.value > 0.0 ? 1.0 : -1.0;
    const double signed_stark = e.side * sign_dr * std::abs(e.stark.value);
    const double gamma = closure_gamma_ps(detuning, e.delta_r.value, signed_stark);
    const double rel = std::hypot(e.delta_r.relative(), e.stark.relative());
    runs.push_back({e.run, detuning, {gamma, gamma * rel}});
    gammas.push_back({gamma, gamma * rel});
  }

  const Uncertain mean = weighted_mean(gammas, "gamma_ps");
  // d(mean)/d(resonance) = sum_i w_i gamma_i / detuning_i / sum_i w_i.
  double sw = 0.0, slope = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const double w = 1.0 / (gammas[i].sigma * gammas[i].sigma);
    sw += w;
    slope += w * gammas[i].value / runs[i].detuning;
  }
  slope /= sw;
  const double resonance_sigma = std::abs(slope) * resonance.zero_crossing_uncertainty;
  const double stat_rel = std::hypot(mean.sigma, resonance_sigma) / mean.value;

  std::vector<Uncertain> leaks;
  for (const auto& e : estimates) leaks.push_back(e.leak_b);
  const Uncertain leak = weighted_mean(leaks, "leak_b");

  FinalResults r = finalize(mean.value, stat_rel, leak, ledger, constants, true);
  r.runs = std::move(runs);
  return r;
}

FinalResults derive_from_measured(const Uncertain& gamma_ps, const Uncertain& leak_b,
                                  const CorrectionLedger& ledger,
                                  const PhysicalConstantsTable& constants,
                                  bool corrections_applied) {
  if (!(gamma_ps.value > 0.0)) throw DomainError("gamma_ps must be positive");
  return finalize(gamma_ps.value, gamma_ps.relative(), leak_b, ledger, constants,
                  !corrections_applied);
}

std::string format_with_uncertainty(double value, double sigma, int digits) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) return fmt::format("{:.6g}", value);
  // Decimal position of the last quoted digit.
  const int exponent = static_cast<int>(std::floor(std::log10(sigma))) - (digits - 1);
  const int decimals = std::max(0, -exponent);
  const double unit = std::pow(10.0, exponent);
  const long long sigma_digits = std::llround(sigma / unit);
  if (decimals == 0) {
    return fmt::format("{:.0f}({})", std::round(value / unit) * unit,
                       static_cast<long long>(std::llround(sigma_digits * unit)));
  }
  return fmt::format("{:.{}f}({})", value, decimals, sigma_digits);
}

}  // namespace iondyne
