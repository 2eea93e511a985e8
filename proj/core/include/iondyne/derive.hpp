#pragma once

#include <string>
#include <vector>

#include "iondyne/constants.hpp"
#include "iondyne/ledger.hpp"
#include "iondyne/resonance_fit.hpp"
#include "iondyne/uncertainty.hpp"

namespace iondyne {

/// Fitted quantities of one measurement run.
struct RunEstimate {
  int run = 0;
  std::string detuning_label;
  double optical_frequency = 0.0;  // rad/s
  int side = 1;                    // nominal sign of the detuning
  Uncertain stark;                 // |Delta_S| (rad/s) from the bracketing echo scans
  Uncertain delta_r;               // R_- - R_+ (1/s)
  Uncertain leak_b;
};

/// Per-run decay rate from the closure relation.
struct RunDecayRate {
  int run = 0;
  double detuning = 0.0;  // rad/s, optical frequency minus fitted resonance
  Uncertain gamma_ps;     // statistical (delta_r, stark) only
};

struct FinalResults {
  Uncertain gamma_ps;  // rad/s, corrected
  Uncertain gamma_pd;  // rad/s
  Uncertain leak_b;
  Uncertain branching_fraction;
  Uncertain lifetime;  // s
  Uncertain d_reduced;  // e a0
  Uncertain d_p32;      // e a0, sqrt(2) d_reduced

  // Budget breakdown.
  double gamma_ps_raw = 0.0;        // before the ledger shift
  double statistical_relative = 0.0;
  double ledger_shift = 0.0;
  double ledger_relative = 0.0;
  bool ledger_shift_applied = true;  // false when the input was already corrected
  std::vector<RunDecayRate> runs;

  /// Throws Error when an internal identity (branching, lifetime, sqrt 2)
  /// is violated beyond 1e-12.
  void check_identities() const;
};

/// Combine run estimates:
///  1. detuning_i = optical_frequency_i - resonance.zero_crossing; its sign
///     must agree with the run's nominal side;
///  2. gamma_i = 3 detuning_i dR_i / Delta_S_i, with Delta_S signed as
///     side * sign(dR) * |Delta_S|;
///  3. inverse-variance mean over runs; the resonance uncertainty enters
///     through d(mean)/d(resonance);
///  4. gamma = mean * (1 + ledger shift), relative uncertainty in quadrature
///     with the ledger total;
///  5. leak factor = inverse-variance mean, then gamma_pd, lifetime,
///     branching fraction and matrix elements.
[[nodiscard]] FinalResults derive_results(const std::vector<RunEstimate>& estimates,
                                          const ResonanceFit& resonance,
                                          const CorrectionLedger& ledger,
                                          const PhysicalConstantsTable& constants);

/// Same final step for externally supplied values. When
/// `corrections_applied` is true the ledger contributes its uncertainty but
/// its shift is not applied again.
[[nodiscard]] FinalResults derive_from_measured(const Uncertain& gamma_ps, const Uncertain& leak_b,
                                                const CorrectionLedger& ledger,
                                                const PhysicalConstantsTable& constants,
                                                bool corrections_applied);

/// "6.904(26)" style: value rounded to the two leading digits of sigma.
[[nodiscard]] std::string format_with_uncertainty(double value, double sigma, int digits = 2);

}  // namespace iondyne
