#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "iondyne/config.hpp"
#include "iondyne/derive.hpp"
#include "iondyne/mcmc.hpp"
#include "iondyne/resonance_fit.hpp"
#include "iondyne/simulator.hpp"

// The simulate -> fit -> derive -> report workflow. Every command reads the
// configuration, works inside an output directory and replaces exactly one
// subdirectory of it:
//
//   simulate  datasets/   runNNN_<block>.dat, manifest.csv, truth.txt
//   fit       estimates/  runNNN_flip.est, runNNN_echo_{before,after}.est,
//                         runs.csv, resonance.est
//   derive    results/    results.txt, runs.csv
//   report    report/     summary.txt, flip_curves.csv, echo_curves.csv,
//                         resonance_points.csv, resonance_line.csv
//
// Output is assembled in a staging directory and renamed into place.

namespace iondyne {

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool fixed_clock = false;
};

/// Per-run fits of one campaign.
struct RunFit {
  int run = 0;
  std::string detuning_label;
  PosteriorEstimate flip;
  PosteriorEstimate echo_before;
  PosteriorEstimate echo_after;
  RunEstimate estimate;
};

struct CampaignFit {
  std::vector<RunFit> runs;
  ResonanceFit resonance;
};

/// Group datasets into runs (by the `run` metadata, four blocks each) and fit
/// them; runs are fitted in parallel with seeds derived from `seed` and the
/// run number. The detuning side of each run comes from the configuration.
[[nodiscard]] CampaignFit fit_campaign(const Config& config,
                                       const std::vector<ShotDataset>& datasets,
                                       std::uint64_t seed, unsigned threads);

/// Resonance regression and derivation of a fitted campaign.
[[nodiscard]] FinalResults derive_campaign(const Config& config,
                                           const std::vector<RunEstimate>& estimates,
                                           const ResonanceFit& resonance);

/// Runs one subcommand. Returns the process exit status; on failure an
/// error record is written to <out>/error.json and a one-line JSON copy to
/// `err`.
int run_command(const std::string& command, const CommandOptions& options, std::ostream& err);

}  // namespace iondyne
