#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "iondyne/constants.hpp"
#include "iondyne/echo_fit.hpp"
#include "iondyne/flip_fit.hpp"
#include "iondyne/ledger.hpp"
#include "iondyne/mcmc.hpp"
#include "iondyne/physics.hpp"
#include "iondyne/simulator.hpp"
#include "iondyne/uncertainty.hpp"

// Run configuration, read from YAML. Keys carry their units in the name
// (rabi_mhz, detuning_ghz, spacing_ns, ...); everything is converted to SI
// and angular frequencies on load. See configs/README.md for the schema.

namespace iondyne {

struct DetuningConfig {
  std::string label;
  double detuning = 0.0;  // rad/s
  [[nodiscard]] int side() const { return detuning > 0.0 ? 1 : -1; }
};

struct LaserConfig {
  double rabi = 0.0;  // rad/s
  double sigma_plus_fraction = 1.0;
  double sigma_minus_fraction = 0.0;
  double pi_fraction = 0.0;
  double max_pi_fraction = kDefaultMaxPiFraction;

  [[nodiscard]] LaserField field(double detuning) const;
};

struct CampaignConfig {
  std::size_t runs = 1;
  double resonance = 0.0;  // rad/s (optical)
  std::vector<DetuningConfig> detunings;
  double wavemeter_sigma = 0.0;  // rad/s
  double drift_per_block = 0.0;

  [[nodiscard]] const DetuningConfig& detuning(const std::string& label) const;
};

/// Externally measured values for a derive-only run.
struct MeasuredInputs {
  Uncertain gamma_ps;  // rad/s
  Uncertain leak_b;
  bool corrections_applied = true;
};

struct Config {
  std::filesystem::path source;  // the file this was read from, if any
  std::uint64_t seed = 1;
  unsigned threads = 1;
  PhysicalConstantsTable constants = PhysicalConstantsTable::shipped();

  std::optional<DecayConstants> truth;
  std::optional<LaserConfig> laser;
  std::optional<CampaignConfig> campaign;
  SpamModel spam = SpamModel::with_sink(0.99, 0.01, SinkReadout::bright);
  SinkReadout sink = SinkReadout::bright;

  std::vector<double> flip_durations;  // s
  long flip_shots = 2500;
  std::vector<double> echo_durations;  // s
  long echo_shots = 150;
  EchoSignalParams echo_signal;

  McmcConfig mcmc;
  FlipPrior prior;
  EchoFitOptions echo_fit;

  CorrectionLedger ledger;
  std::optional<MeasuredInputs> measured;

  /// Sections `simulate` needs (truth, laser, campaign, scans).
  void require_simulation() const;
  /// Sections `fit` needs (campaign for detuning signs).
  void require_fit() const;

  [[nodiscard]] RunSchedule schedule() const;
  [[nodiscard]] std::vector<DetuningSetting> detuning_settings() const;
};

/// Parse YAML text. Relative file references (ledger, constants) resolve
/// against `base_dir`. Validation failures throw ConfigError naming the
/// dotted key path.
[[nodiscard]] Config parse_config(const std::string& yaml_text,
                                  const std::filesystem::path& base_dir = {});
[[nodiscard]] Config load_config(const std::filesystem::path& path);

}  // namespace iondyne
