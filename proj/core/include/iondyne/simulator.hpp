#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iondyne/dynamics.hpp"
#include "iondyne/physics.hpp"

namespace iondyne {

/// How population parked in the D3/2 sink reads out. With the 866 nm
/// repumper on during detection it scatters like the unshelved level.
enum class SinkReadout { bright, dark };

/// Readout as a linear map from populations to the dark-event probability.
struct SpamModel {
  double dark_given_up = 1.0;
  double dark_given_down = 0.0;
  double dark_given_sink = 0.0;

  /// Sink tied to the down (bright) or up (dark) response.
  static SpamModel with_sink(double dark_given_up, double dark_given_down, SinkReadout readout);

  /// Throws DomainError unless all entries are in [0,1] and up > down.
  void validate() const;
  [[nodiscard]] double dark_probability(const PopulationState& s) const {
    return dark_given_up * s.p_up + dark_given_down * s.p_down + dark_given_sink * s.p_sink;
  }
};

/// What was prepared before a scan; `echo` marks spin-echo scans.
enum class Initialization { up, down, echo };

[[nodiscard]] const char* to_string(Initialization init);
[[nodiscard]] Initialization initialization_from_string(const std::string& text);

struct ScanPlan {
  std::vector<double> durations;  // s, strictly increasing
  long shots_per_duration = 1;
  Initialization initialization = Initialization::up;
  std::string detuning_label;

  /// start, start + spacing, ... (count points).
  static ScanPlan arithmetic(std::size_t count, double spacing, double start, long shots,
                             Initialization init, std::string label);
  void validate() const;
};

struct ShotRow {
  double duration = 0.0;  // s
  long shots = 0;
  long dark_count = 0;
  Initialization initialization = Initialization::up;

  [[nodiscard]] double dark_fraction() const {
    return static_cast<double>(dark_count) / static_cast<double>(shots);
  }
};

enum class ScanKind { flip, echo };

struct DatasetMetadata {
  std::uint64_t seed = 0;
  std::string detuning_label;
  ScanKind kind = ScanKind::flip;
  std::optional<int> run;
  std::optional<int> block;
  /// Wavemeter reading of the laser frequency, rad/s.
  std::optional<double> optical_frequency;
  /// Keys read from a file that this version does not interpret.
  std::vector<std::pair<std::string, std::string>> extra;
};

struct ShotDataset {
  DatasetMetadata metadata;
  std::vector<ShotRow> rows;

  /// Throws InputError if any row has dark_count outside [0, shots].
  void validate() const;
  [[nodiscard]] std::vector<double> durations() const;
};

/// Parameters of the spin-echo fringe other than its frequency.
struct EchoSignalParams {
  double contrast = 0.45;
  double offset = 0.5;
  double phase = 0.0;
  double decay_rate = 0.0;  // 1/s
};

struct FlipSimulationOptions {
  double max_pi_fraction = kDefaultMaxPiFraction;
  std::uint32_t block = 0;  // stream coordinate
};

/// Dark-event probabilities of a flip scan without shot noise.
[[nodiscard]] std::vector<double> expected_flip_fractions(const LaserField& field,
                                                          const DecayConstants& truth,
                                                          const SpamModel& spam,
                                                          const ScanPlan& plan,
                                                          double max_pi_fraction =
                                                              kDefaultMaxPiFraction);

/// Dark-event probabilities of an echo scan without shot noise.
[[nodiscard]] std::vector<double> expected_echo_fractions(double stark,
                                                          const EchoSignalParams& signal,
                                                          const ScanPlan& plan);

/// One Bernoulli draw per shot from the addressed stream
/// (seed, shot, block, duration index, shot index).
[[nodiscard]] ShotDataset simulate_flip_scan(const LaserField& field, const DecayConstants& truth,
                                             const SpamModel& spam, const ScanPlan& plan,
                                             std::uint64_t seed,
                                             const FlipSimulationOptions& options = {});

[[nodiscard]] ShotDataset simulate_echo_scan(double stark, const EchoSignalParams& signal,
                                             const ScanPlan& plan, std::uint64_t seed,
                                             std::uint32_t block = 0);

/// A configured detuning: its label, beam and true laser frequency (rad/s).
struct DetuningSetting {
  std::string label;
  LaserField field;
  double optical_frequency = 0.0;
};

enum class BlockKind { echo_before, flip_up, flip_down, echo_after };
inline constexpr std::size_t kBlocksPerRun = 4;

/// Omega^2 multiplied by 1 + slope * k for the k-th block of the campaign.
struct DriftModel {
  double omega2_slope_per_block = 0.0;
  [[nodiscard]] double factor(std::size_t block) const {
    return 1.0 + omega2_slope_per_block * static_cast<double>(block);
  }
};

/// Interleaved measurement runs: each run is echo, flip from up, flip from
/// down, echo, all at one detuning.
struct RunSchedule {
  std::vector<std::string> run_labels;
  std::vector<double> flip_durations;  // s
  long flip_shots = 2500;
  std::vector<double> echo_durations;  // s
  long echo_shots = 150;
  EchoSignalParams echo_signal;
  DriftModel drift;
  double wavemeter_sigma = 0.0;  // rad/s
  double max_pi_fraction = kDefaultMaxPiFraction;

  /// Cycle `labels` over `runs` runs.
  static RunSchedule round_robin(const std::vector<std::string>& labels, std::size_t runs);
  void validate() const;
  [[nodiscard]] std::size_t block_count() const { return run_labels.size() * kBlocksPerRun; }
};

/// Field with Omega^2 scaled by `factor`.
[[nodiscard]] LaserField with_intensity_factor(LaserField field, double factor);

/// Every block of every run, in schedule order (4 datasets per run).
/// Blocks are generated in parallel; output does not depend on `threads`.
[[nodiscard]] std::vector<ShotDataset> simulate_campaign(const RunSchedule& schedule,
                                                         const std::vector<DetuningSetting>& fields,
                                                         const DecayConstants& truth,
                                                         const SpamModel& spam,
                                                         std::uint64_t seed, unsigned threads = 1);

}  // namespace iondyne
