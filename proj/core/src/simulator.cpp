#include "iondyne/simulator.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>

#include "iondyne/error.hpp"
#include "iondyne/parallel.hpp"
#include "iondyne/rng.hpp"

namespace iondyne {

SpamModel SpamModel::with_sink(double dark_given_up, double dark_given_down,
                               SinkReadout readout) {
  SpamModel spam{dark_given_up, dark_given_down,
                 readout == SinkReadout::bright ? dark_given_down : dark_given_up};
  spam.validate();
  return spam;
}

void SpamModel::validate() const {
  for (double p : {dark_given_up, dark_given_down, dark_given_sink}) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("SPAM probabilities must lie in [0, 1]");
  }
  if (!(dark_given_up > dark_given_down)) {
    throw DomainError("readout does not discriminate: dark_given_up <= dark_given_down");
  }
}

const char* to_string(Initialization init) {
  switch (init) {
    case Initialization::up: return "up";
    case Initialization::down: return "down";
    case Initialization::echo: return "echo";
  }
  return "?";
}

Initialization initialization_from_string(const std::string& text) {
  if (text == "up") return Initialization::up;
  if (text == "down") return Initialization::down;
  if (text == "echo") return Initialization::echo;
  throw InputError("unknown initialization '" + text + "'");
}

ScanPlan ScanPlan::arithmetic(std::size_t count, double spacing, double start, long shots,
                              Initialization init, std::string label) {
  ScanPlan plan;
  plan.durations.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    plan.durations.push_back(start + spacing * static_cast<double>(i));
  }
  plan.shots_per_duration = shots;
  plan.initialization = init;
  plan.detuning_label = std::move(label);
  plan.validate();
  return plan;
}

void ScanPlan::validate() const {
  if (durations.empty()) throw DomainError("scan plan has no durations");
  if (shots_per_duration < 1) throw DomainError("shots_per_duration must be >= 1");
  for (std::size_t i = 0; i < durations.size(); ++i) {
    if (!(durations[i] >= 0.0)) throw DomainError("durations must be >= 0");
    if (i > 0 && !(durations[i] > durations[i - 1])) {
      throw DomainError("durations must be strictly increasing");
    }
  }
}

void ShotDataset::validate() const {
  for (const auto& row : rows) {
    if (row.shots < 1) throw InputError("dataset row with fewer than one shot");
    if (row.dark_count < 0 || row.dark_count > row.shots) {
      throw InputError(fmt::format("dark_count {} outside [0, {}]", row.dark_count, row.shots));
    }
  }
}

std::vector<double> ShotDataset::durations() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.duration);
  return out;
}

namespace {

Spin spin_of(Initialization init) {
  if (init == Initialization::echo) throw DomainError("flip scan needs an up or down preparation");
  return init == Initialization::up ? Spin::up : Spin::down;
}

std::vector<ShotRow> draw_rows(const std::vector<double>& probabilities, const ScanPlan& plan,
                               std::uint64_t seed, std::uint32_t block) {
  std::vector<ShotRow> rows;
  rows.reserve(probabilities.size());
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double q = probabilities[i];
    if (!(q >= 0.0 && q <= 1.0)) {
      throw Error(fmt::format("internal: dark probability {} outside [0, 1]", q));
    }
    const StreamAddress address{seed, StreamPurpose::shot, block, static_cast<std::uint32_t>(i)};
    long dark = 0;
    for (long shot = 0; shot < plan.shots_per_duration; ++shot) {
      if (uniform_at(address, static_cast<std::uint32_t>(shot)) < q) ++dark;
    }
    rows.push_back({plan.durations[i], plan.shots_per_duration, dark, plan.initialization});
  }
  return rows;
}

}  // namespace

std::vector<double> expected_flip_fractions(const LaserField& field, const DecayConstants& truth,
                                            const SpamModel& spam, const ScanPlan& plan,
                                            double max_pi_fraction) {
  plan.validate();
  spam.validate();
  truth.validate();
  const Spin init = spin_of(plan.initialization);
  const RatePair rates = spin_flip_rates(field, truth.gamma_ps);
  (void)leak_rates(field, rates, truth.leak_b, max_pi_fraction);
  const DynamicsParams params(rates, truth.leak_b);
  std::vector<double> out;
  out.reserve(plan.durations.size());
  for (double t : plan.durations) {
    out.push_back(spam.dark_probability(evolve_analytic(params, init, t)));
  }
  return out;
}

std::vector<double> expected_echo_fractions(double stark, const EchoSignalParams& signal,
                                            const ScanPlan& plan) {
  plan.validate();
  std::vector<double> out;
  out.reserve(plan.durations.size());
  for (double t : plan.durations) {
    out.push_back(spin_echo_signal(stark, t, signal.contrast, signal.offset, signal.phase,
                                   signal.decay_rate)
                      .value);
  }
  return out;
}

ShotDataset simulate_flip_scan(const LaserField& field, const DecayConstants& truth,
                               const SpamModel& spam, const ScanPlan& plan, std::uint64_t seed,
                               const FlipSimulationOptions& options) {
  const auto q = expected_flip_fractions(field, truth, spam, plan, options.max_pi_fraction);
  ShotDataset data;
  data.metadata.seed = seed;
  data.metadata.detuning_label = plan.detuning_label;
  data.metadata.kind = ScanKind::flip;
  data.rows = draw_rows(q, plan, seed, options.block);
  return data;
}

ShotDataset simulate_echo_scan(double stark, const EchoSignalParams& signal,
                               const ScanPlan& plan, std::uint64_t seed, std::uint32_t block) {
  if (plan.initialization != Initialization::echo) {
    throw DomainError("echo scan plan must use the echo initialization");
  }
  const auto q = expected_echo_fractions(stark, signal, plan);
  ShotDataset data;
  data.metadata.seed = seed;
  data.metadata.detuning_label = plan.detuning_label;
  data.metadata.kind = ScanKind::echo;
  data.rows = draw_rows(q, plan, seed, block);
  return data;
}

RunSchedule RunSchedule::round_robin(const std::vector<std::string>& labels, std::size_t runs) {
  if (labels.empty()) throw ConfigError("campaign.detunings", "no detunings configured");
  RunSchedule schedule;
  for (std::size_t r = 0; r < runs; ++r) schedule.run_labels.push_back(labels[r % labels.size()]);
  return schedule;
}

void RunSchedule::validate() const {
  if (run_labels.empty()) throw ConfigError("campaign.runs", "run count must be >= 1");
  ScanPlan{flip_durations, flip_shots, Initialization::up, {}}.validate();
  ScanPlan{echo_durations, echo_shots, Initialization::echo, {}}.validate();
  if (!(wavemeter_sigma >= 0.0)) throw ConfigError("campaign.wavemeter_sigma_mhz", "must be >= 0");
  for (std::size_t k = 0; k < block_count(); ++k) {
    if (!(drift.factor(k) > 0.0)) {
      throw ConfigError("campaign.drift_per_block", "drift drives Omega^2 to zero or below");
    }
  }
}

LaserField with_intensity_factor(LaserField field, double factor) {
  field.rabi *= std::sqrt(factor);
  return field;
}

std::vector<ShotDataset> simulate_campaign(const RunSchedule& schedule,
                                           const std::vector<DetuningSetting>& fields,
                                           const DecayConstants& truth, const SpamModel& spam,
                                           std::uint64_t seed, unsigned threads) {
  schedule.validate();
  std::map<std::string, const DetuningSetting*> by_label;
  for (const auto& f : fields) by_label[f.label] = &f;
  for (const auto& label : schedule.run_labels) {
    if (!by_label.contains(label)) {
      throw ConfigError("campaign.runs", "schedule references unknown detuning label '" + label +
                                             "'");
    }
  }

  std::vector<double> readings(schedule.run_labels.size());
  for (std::size_t r = 0; r < readings.size(); ++r) {
    double noise = 0.0;
    if (schedule.wavemeter_sigma > 0.0) {
      StreamEngine engine({seed, StreamPurpose::wavemeter, static_cast<std::uint32_t>(r), 0});
      noise = schedule.wavemeter_sigma * engine.normal();
    }
    readings[r] = by_label.at(schedule.run_labels[r])->optical_frequency + noise;
  }

  std::vector<ShotDataset> out(schedule.block_count());
  parallel_for(out.size(), threads, [&](std::size_t k) {
    const std::size_t run = k / kBlocksPerRun;
    const auto kind = static_cast<BlockKind>(k % kBlocksPerRun);
    const DetuningSetting& setting = *by_label.at(schedule.run_labels[run]);
    const LaserField field = with_intensity_factor(setting.field, schedule.drift.factor(k));
    const auto block = static_cast<std::uint32_t>(k);

    ShotDataset data;
    if (kind == BlockKind::echo_before || kind == BlockKind::echo_after) {
      ScanPlan plan{schedule.echo_durations, schedule.echo_shots, Initialization::echo,
                    setting.label};
      data = simulate_echo_scan(stark_shift(field), schedule.echo_signal, plan, seed, block);
    } else {
      ScanPlan plan{schedule.flip_durations, schedule.flip_shots,
                    kind == BlockKind::flip_up ? Initialization::up : Initialization::down,
                    setting.label};
      data = simulate_flip_scan(field, truth, spam, plan, seed,
                                {schedule.max_pi_fraction, block});
    }
    data.metadata.run = static_cast<int>(run);
    data.metadata.block = static_cast<int>(k);
    data.metadata.optical_frequency = readings[run];
    out[k] = std::move(data);
  });
  return out;
}

}  // namespace iondyne
