#include "iondyne/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "iondyne/dataset_io.hpp"
#include "iondyne/echo_fit.hpp"
#include "iondyne/error.hpp"
#include "iondyne/estimate_io.hpp"
#include "iondyne/flip_fit.hpp"
#include "iondyne/parallel.hpp"
#include "iondyne/rng.hpp"
#include "iondyne/units.hpp"

namespace iondyne {

namespace fs = std::filesystem;

namespace {

const char* block_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::echo_before: return "echo_before";
    case BlockKind::flip_up: return "flip_up";
    case BlockKind::flip_down: return "flip_down";
    case BlockKind::echo_after: return "echo_after";
  }
  return "?";
}

std::string run_stem(int run) { return fmt::format("run{:03d}", run); }

std::string g17(double v) { return fmt::format("{:.17g}", v); }

std::string timestamp(bool fixed_clock) {
  if (fixed_clock) return "1970-01-01T00:00:00Z";
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

// Writes into <out>/.staging-<name>, then swaps the result in as <out>/<name>.
class StagedDirectory {
 public:
  StagedDirectory(const fs::path& out, const std::string& name)
      : final_(out / name), staging_(out / (".staging-" + name)) {
    fs::create_directories(out);
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  ~StagedDirectory() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(staging_, ec);
    }
  }
  StagedDirectory(const StagedDirectory&) = delete;
  StagedDirectory& operator=(const StagedDirectory&) = delete;

  [[nodiscard]] fs::path path(const std::string& file) const { return staging_ / file; }

  void write(const std::string& file, const std::string& content) const {
    std::ofstream out(path(file), std::ios::binary);
    out << content;
    if (!out) throw InputError("cannot write " + path(file).string());
  }

  void commit() {
    const fs::path old = final_.string() + ".old";
    fs::remove_all(old);
    if (fs::exists(final_)) fs::rename(final_, old);
    fs::rename(staging_, final_);
    fs::remove_all(old);
    committed_ = true;
  }

 private:
  fs::path final_;
  fs::path staging_;
  bool committed_ = false;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    if (text == "nan") return std::nan("");
    throw InputError(what + ": not a number: '" + text + "'");
  }
}

// ---------------------------------------------------------------- simulate

void command_simulate(const Config& cfg, const CommandOptions& opt, std::uint64_t seed,
                      unsigned threads) {
  cfg.require_simulation();
  const RunSchedule schedule = cfg.schedule();
  const auto datasets = simulate_campaign(schedule, cfg.detuning_settings(), *cfg.truth, cfg.spam,
                                          seed, threads);

  StagedDirectory dir(opt.out, "datasets");
  std::string manifest = "file,run,block,kind,detuning_label\n";
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    const auto& data = datasets[i];
    const int run = static_cast<int>(i / kBlocksPerRun);
    const auto kind = static_cast<BlockKind>(i % kBlocksPerRun);
    const std::string file = run_stem(run) + "_" + block_name(kind) + ".dat";
    dir.write(file, format_dataset(data));
    manifest += fmt::format("{},{},{},{},{}\n", file, run, *data.metadata.block,
                            block_name(kind), data.metadata.detuning_label);
  }
  dir.write("manifest.csv", manifest);

  const auto& truth = *cfg.truth;
  std::string text = "# iondyne-truth v1\n";
  text += fmt::format("seed={}\n", seed);
  text += fmt::format("gamma_ps_rad_per_s={}\n", g17(truth.gamma_ps));
  text += fmt::format("leak_b={}\n", g17(truth.leak_b));
  text += fmt::format("resonance_hz={}\n", g17(hz_from_angular(cfg.campaign->resonance)));
  for (const auto& d : cfg.campaign->detunings) {
    const auto field = cfg.laser->field(d.detuning);
    const auto rates = spin_flip_rates(field, truth.gamma_ps);
    text += fmt::format("{}.detuning_hz={}\n", d.label, g17(hz_from_angular(d.detuning)));
    text += fmt::format("{}.stark_rad_per_s={}\n", d.label, g17(stark_shift(field)));
    text += fmt::format("{}.delta_r_per_s={}\n", d.label, g17(rates.delta()));
  }
  dir.write("truth.txt", text);
  dir.commit();
}

// --------------------------------------------------------------------- fit

std::vector<ShotDataset> load_campaign_datasets(const fs::path& dir) {
  const std::string manifest = read_file(dir / "manifest.csv");
  std::istringstream in(manifest);
  std::string line;
  std::getline(in, line);  // column names
  std::vector<ShotDataset> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.empty()) continue;
    out.push_back(load_dataset(dir / fields[0]));
  }
  if (out.empty()) throw InputError(dir.string() + ": manifest lists no datasets");
  return out;
}

std::string format_estimate(const PosteriorEstimate& estimate,
                            std::vector<std::pair<std::string, std::string>> metadata) {
  std::ostringstream out;
  write_estimate(out, EstimateRecord{std::move(metadata), estimate});
  return out.str();
}

constexpr const char* kRunsColumns =
    "run,detuning_label,optical_frequency_hz,side,stark_rad_per_s,stark_sigma,delta_r_per_s,"
    "delta_r_sigma,leak_b,leak_b_sigma,converged";

std::string format_runs(const std::vector<RunFit>& runs) {
  std::string out = std::string(kRunsColumns) + "\n";
  for (const auto& r : runs) {
    const auto& e = r.estimate;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", e.run, e.detuning_label,
                       g17(hz_from_angular(e.optical_frequency)), e.side, g17(e.stark.value),
                       g17(e.stark.sigma), g17(e.delta_r.value), g17(e.delta_r.sigma),
                       g17(e.leak_b.value), g17(e.leak_b.sigma), r.flip.converged ? 1 : 0);
  }
  return out;
}

std::vector<RunEstimate> parse_runs(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != kRunsColumns) throw InputError("runs.csv: unexpected column header");
  std::vector<RunEstimate> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) throw InputError("runs.csv: expected 11 fields: " + line);
    RunEstimate e;
    e.run = std::stoi(f[0]);
    e.detuning_label = f[1];
    e.optical_frequency = angular_from_hz(to_double(f[2], "runs.csv"));
    e.side = std::stoi(f[3]);
    e.stark = {to_double(f[4], "runs.csv"), to_double(f[5], "runs.csv")};
    e.delta_r = {to_double(f[6], "runs.csv"), to_double(f[7], "runs.csv")};
    e.leak_b = {to_double(f[8], "runs.csv"), to_double(f[9], "runs.csv")};
    out.push_back(e);
  }
  if (out.empty()) throw InputError("runs.csv: no runs");
  return out;
}

std::string format_resonance(const ResonanceFit& fit) {
  PosteriorEstimate summary;
  const double f0 = hz_from_angular(fit.zero_crossing);
  const double s0 = hz_from_angular(fit.zero_crossing_uncertainty);
  summary.parameters.push_back({"zero_crossing_hz", f0, f0 - s0, f0 + s0, std::nan("")});
  return format_estimate(summary, {{"kind", "resonance"},
                                   {"slope_s_per_rad", g17(fit.slope)},
                                   {"intercept", g17(fit.intercept)},
                                   {"reference_hz", g17(hz_from_angular(fit.reference_frequency))},
                                   {"zero_crossing_hz", g17(f0)},
                                   {"zero_crossing_sigma_hz", g17(s0)},
                                   {"chi2", g17(fit.chi2)},
                                   {"dof", std::to_string(fit.dof)}});
}

ResonanceFit load_resonance(const fs::path& path) {
  const auto record = load_estimate(path);
  auto num = [&](const std::string& key) { return to_double(record.meta(key), path.string()); };
  ResonanceFit fit;
  fit.slope = num("slope_s_per_rad");
  fit.intercept = num("intercept");
  fit.reference_frequency = angular_from_hz(num("reference_hz"));
  fit.zero_crossing = angular_from_hz(num("zero_crossing_hz"));
  fit.zero_crossing_uncertainty = angular_from_hz(num("zero_crossing_sigma_hz"));
  fit.chi2 = num("chi2");
  fit.dof = static_cast<int>(num("dof"));
  return fit;
}

void command_fit(const Config& cfg, const CommandOptions& opt, std::uint64_t seed,
                 unsigned threads) {
  cfg.require_fit();
  const auto datasets = load_campaign_datasets(opt.out / "datasets");
  const CampaignFit fit = fit_campaign(cfg, datasets, seed, threads);

  StagedDirectory dir(opt.out, "estimates");
  for (const auto& r : fit.runs) {
    const std::string stem = run_stem(r.run);
    auto meta = [&](const char* kind) {
      return std::vector<std::pair<std::string, std::string>>{
          {"kind", kind},
          {"run", std::to_string(r.run)},
          {"detuning_label", r.detuning_label}};
    };
    auto flip_meta = meta("flip");
    flip_meta.emplace_back("seed", std::to_string(derive_seed(seed, static_cast<std::uint32_t>(r.run))));
    flip_meta.emplace_back("converged", r.flip.converged ? "true" : "false");
    flip_meta.emplace_back("acceptance_rate", g17(r.flip.acceptance_rate));
    dir.write(stem + "_flip.est", format_estimate(r.flip, flip_meta));
    dir.write(stem + "_echo_before.est", format_estimate(r.echo_before, meta("echo")));
    dir.write(stem + "_echo_after.est", format_estimate(r.echo_after, meta("echo")));
  }
  dir.write("runs.csv", format_runs(fit.runs));
  dir.write("resonance.est", format_resonance(fit.resonance));
  dir.commit();
}

// ------------------------------------------------------------------ derive

struct Row {
  std::string key;
  std::string value;
};

void add_quantity(std::vector<Row>& rows, const std::string& name, const Uncertain& q,
                  double display_scale, const std::string& display_unit,
                  const std::string& si_unit) {
  const std::string shown =
      format_with_uncertainty(q.value * display_scale, q.sigma * display_scale);
  rows.push_back({name, display_unit.empty() ? shown : shown + " " + display_unit});
  rows.push_back({name + "_" + si_unit, g17(q.value)});
  rows.push_back({name + "_sigma_" + si_unit, g17(q.sigma)});
}

std::string format_results(const FinalResults& r, const std::string& mode, bool fixed_clock,
                           const std::optional<std::uint64_t>& seed) {
  std::vector<Row> rows;
  rows.push_back({"generated_at", timestamp(fixed_clock)});
  rows.push_back({"mode", mode});
  if (seed) rows.push_back({"seed", std::to_string(*seed)});
  const double per_2pi_mhz = 1.0 / (kTwoPi * 1e6);
  add_quantity(rows, "gamma_ps", r.gamma_ps, per_2pi_mhz, "2pi MHz", "rad_per_s");
  add_quantity(rows, "gamma_pd", r.gamma_pd, per_2pi_mhz, "2pi MHz", "rad_per_s");
  add_quantity(rows, "leak_b", r.leak_b, 1.0, "", "value");
  add_quantity(rows, "branching_fraction", r.branching_fraction, 1.0, "", "value");
  add_quantity(rows, "lifetime", r.lifetime, 1e9, "ns", "s");
  add_quantity(rows, "d_reduced", r.d_reduced, 1.0, "e a0", "e_a0");
  add_quantity(rows, "d_p32", r.d_p32, 1.0, "e a0", "e_a0");
  rows.push_back({"gamma_ps_raw_rad_per_s", g17(r.gamma_ps_raw)});
  rows.push_back({"statistical_relative", g17(r.statistical_relative)});
  rows.push_back({"ledger_shift", g17(r.ledger_shift)});
  rows.push_back({"ledger_relative", g17(r.ledger_relative)});
  rows.push_back({"ledger_shift_applied", r.ledger_shift_applied ? "true" : "false"});
  rows.push_back({"runs", std::to_string(r.runs.size())});

  std::string out = "# iondyne-results v1\n";
  for (const auto& row : rows) out += row.key + "=" + row.value + "\n";
  return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

void command_derive(const Config& cfg, const CommandOptions& opt,
                    const std::optional<std::uint64_t>& seed) {
  FinalResults results;
  std::string mode;
  if (cfg.measured) {
    mode = "measured";
    results = derive_from_measured(cfg.measured->gamma_ps, cfg.measured->leak_b, cfg.ledger,
                                   cfg.constants, cfg.measured->corrections_applied);
  } else {
    mode = "campaign";
    const fs::path est = opt.out / "estimates";
    const auto estimates = parse_runs(read_file(est / "runs.csv"));
    results = derive_campaign(cfg, estimates, load_resonance(est / "resonance.est"));
  }
  results.check_identities();

  StagedDirectory dir(opt.out, "results");
  dir.write("results.txt", format_results(results, mode, opt.fixed_clock,
                                          mode == "campaign" ? seed : std::nullopt));
  std::string runs = "run,detuning_hz,gamma_ps_rad_per_s,gamma_ps_sigma\n";
  for (const auto& r : results.runs) {
    runs += fmt::format("{},{},{},{}\n", r.run, g17(hz_from_angular(r.detuning)),
                        g17(r.gamma_ps.value), g17(r.gamma_ps.sigma));
  }
  dir.write("runs.csv", runs);
  dir.commit();
}

// ------------------------------------------------------------------ report

double echo_model(const PosteriorEstimate& e, double t, double t0) {
  return e.at("offset").median +
         e.at("contrast").median * std::exp(-e.at("decay_rate").median * (t - t0)) *
             std::cos(e.at("stark").median * t + e.at("phase").median);
}

void command_report(const Config& cfg, const CommandOptions& opt) {
  const fs::path results_file = opt.out / "results" / "results.txt";
  const auto results = parse_key_values(read_file(results_file));
  StagedDirectory dir(opt.out, "report");

  std::string summary = "iondyne report\n\n";
  auto line = [&](const std::string& label, const std::string& key) {
    const auto it = results.find(key);
    if (it != results.end()) summary += fmt::format("  {:<28}{}\n", label, it->second);
  };
  summary += "Final values\n";
  line("decay rate P1/2 -> S1/2", "gamma_ps");
  line("decay rate P1/2 -> D3/2", "gamma_pd");
  line("leak factor b", "leak_b");
  line("branching fraction", "branching_fraction");
  line("lifetime", "lifetime");
  line("reduced matrix element", "d_reduced");
  line("P3/2 matrix element", "d_p32");
  summary += "\nBudget\n";
  line("statistical (relative)", "statistical_relative");
  line("ledger shift (relative)", "ledger_shift");
  line("ledger unc. (relative)", "ledger_relative");
  line("ledger shift applied", "ledger_shift_applied");
  line("runs", "runs");
  line("mode", "mode");
  line("generated", "generated_at");

  if (!cfg.ledger.rows().empty()) {
    summary += "\nCorrection ledger (relative, 1e-3)\n";
    for (const auto& row : cfg.ledger.rows()) {
      summary += fmt::format("  {:<40}{:>+8.2f}{:>8.2f}\n", row.label, row.shift * 1e3,
                             row.uncertainty * 1e3);
    }
    summary += fmt::format("  {:<40}{:>+8.2f}{:>8.2f}\n", "total", cfg.ledger.total_shift() * 1e3,
                           cfg.ledger.total_uncertainty() * 1e3);
  }

  const fs::path est = opt.out / "estimates";
  const fs::path data = opt.out / "datasets";
  if (fs::exists(est / "runs.csv") && fs::exists(est / "resonance.est")) {
    const auto runs = parse_runs(read_file(est / "runs.csv"));
    const auto resonance = load_resonance(est / "resonance.est");
    summary += "\nResonance\n";
    summary += fmt::format("  {:<28}{:.2f} 2pi MHz\n", "zero-crossing uncertainty",
                           mhz_from_angular(resonance.zero_crossing_uncertainty));
    summary += fmt::format("  {:<28}{:.17g}\n", "zero crossing (Hz)",
                           hz_from_angular(resonance.zero_crossing));
    summary += fmt::format("  {:<28}{:.3f} / {}\n", "chi2 / dof", resonance.chi2, resonance.dof);

    std::string points =
        "run,detuning_label,optical_frequency_hz,detuning_hz,ordinate,ordinate_sigma\n";
    double lo = INFINITY;
    double hi = -INFINITY;
    for (const auto& r : runs) {
      const ResonancePoint p{r.optical_frequency, r.side,      r.stark.value,
                             r.stark.sigma,       r.delta_r.value, r.delta_r.sigma};
      points += fmt::format("{},{},{},{},{},{}\n", r.run, r.detuning_label,
                            g17(hz_from_angular(r.optical_frequency)),
                            g17(hz_from_angular(r.optical_frequency - resonance.zero_crossing)),
                            g17(p.ordinate()), g17(p.ordinate_sigma()));
      lo = std::min(lo, r.optical_frequency);
      hi = std::max(hi, r.optical_frequency);
    }
    dir.write("resonance_points.csv", points);

    std::string curve = "optical_frequency_hz,detuning_hz,ordinate\n";
    const double margin = 0.1 * (hi - lo);
    constexpr int kSamples = 51;
    for (int i = 0; i < kSamples; ++i) {
      const double x = (lo - margin) + (hi - lo + 2 * margin) * i / (kSamples - 1);
      curve += fmt::format("{},{},{}\n", g17(hz_from_angular(x)),
                           g17(hz_from_angular(x - resonance.zero_crossing)),
                           g17(resonance.evaluate(x)));
    }
    dir.write("resonance_line.csv", curve);

    if (fs::exists(data / "manifest.csv")) {
      std::string flip = "run,detuning_label,init,duration_s,shots,dark_fraction,model\n";
      std::string echo = "run,detuning_label,block,duration_s,shots,dark_fraction,model\n";
      for (const auto& r : runs) {
        const std::string stem = run_stem(r.run);
        const auto flip_est = load_estimate(est / (stem + "_flip.est")).estimate;
        FlipModelParams params;
        params.r_plus = flip_est.at("r_plus").median;
        params.r_minus = flip_est.at("r_minus").median;
        params.leak_b = flip_est.at("leak_b").median;
        params.spam = SpamModel::with_sink(flip_est.at("dark_given_up").median,
                                           flip_est.at("dark_given_down").median, cfg.sink);
        const DynamicsParams dyn(RatePair{params.r_plus, params.r_minus}, params.leak_b);
        for (const char* block : {"flip_up", "flip_down"}) {
          const auto ds = load_dataset(data / (stem + "_" + block + ".dat"));
          for (const auto& row : ds.rows) {
            const Spin spin = row.initialization == Initialization::up ? Spin::up : Spin::down;
            const double q = params.spam.dark_probability(evolve_analytic(dyn, spin, row.duration));
            flip += fmt::format("{},{},{},{},{},{},{}\n", r.run, r.detuning_label,
                                to_string(row.initialization), g17(row.duration), row.shots,
                                g17(row.dark_fraction()), g17(q));
          }
        }
        for (const char* block : {"echo_before", "echo_after"}) {
          const auto ds = load_dataset(data / (stem + "_" + block + ".dat"));
          const auto fit = load_estimate(est / (stem + "_" + block + ".est")).estimate;
          const double t0 = ds.rows.empty() ? 0.0 : ds.rows.front().duration;
          for (const auto& row : ds.rows) {
            echo += fmt::format("{},{},{},{},{},{},{}\n", r.run, r.detuning_label, block,
                                g17(row.duration), row.shots, g17(row.dark_fraction()),
                                g17(echo_model(fit, row.duration, t0)));
          }
        }
      }
      dir.write("flip_curves.csv", flip);
      dir.write("echo_curves.csv", echo);
    }
  }
  dir.write("summary.txt", summary);
  dir.commit();
}

void write_error(const CommandOptions& opt, const std::string& command, const nlohmann::json& record,
                 std::ostream& err) {
  err << record.dump() << '\n';
  if (opt.out.empty()) return;
  std::error_code ec;
  fs::create_directories(opt.out, ec);
  const fs::path tmp = opt.out / ".error.json.tmp";
  {
    std::ofstream out(tmp);
    out << record.dump(2) << '\n';
    if (!out) return;
  }
  fs::rename(tmp, opt.out / "error.json", ec);
  (void)command;
}

}  // namespace

CampaignFit fit_campaign(const Config& cfg, const std::vector<ShotDataset>& datasets,
                         std::uint64_t seed, unsigned threads) {
  cfg.require_fit();
  struct Blocks {
    std::vector<const ShotDataset*> echo;
    const ShotDataset* up = nullptr;
    const ShotDataset* down = nullptr;
  };
  std::map<int, Blocks> by_run;
  for (const auto& d : datasets) {
    if (!d.metadata.run) throw InputError("dataset without run metadata");
    if (d.rows.empty()) throw InputError(fmt::format("run {}: empty dataset", *d.metadata.run));
    Blocks& b = by_run[*d.metadata.run];
    if (d.metadata.kind == ScanKind::echo) {
      b.echo.push_back(&d);
    } else if (d.rows.front().initialization == Initialization::up) {
      if (b.up) throw InputError(fmt::format("run {}: two up-prepared flip scans", *d.metadata.run));
      b.up = &d;
    } else {
      if (b.down) throw InputError(fmt::format("run {}: two down-prepared flip scans", *d.metadata.run));
      b.down = &d;
    }
  }

  std::vector<std::pair<int, Blocks>> runs(by_run.begin(), by_run.end());
  for (auto& [run, b] : runs) {
    if (b.echo.size() != 2 || !b.up || !b.down) {
      throw InputError(fmt::format("run {}: expected echo, flip up, flip down, echo", run));
    }
    std::sort(b.echo.begin(), b.echo.end(), [](const ShotDataset* x, const ShotDataset* y) {
      return x->metadata.block.value_or(0) < y->metadata.block.value_or(0);
    });
  }

  McmcConfig mcmc = cfg.mcmc;
  mcmc.threads = std::max(1u, threads / static_cast<unsigned>(std::max<std::size_t>(1, runs.size())));

  CampaignFit out;
  out.runs.resize(runs.size());
  parallel_for(runs.size(), threads, [&](std::size_t i) {
    const auto& [run, b] = runs[i];
    RunFit& r = out.runs[i];
    r.run = run;
    r.detuning_label = b.up->metadata.detuning_label;
    const auto& detuning = cfg.campaign->detuning(r.detuning_label);
    if (!b.up->metadata.optical_frequency) {
      throw InputError(fmt::format("run {}: dataset has no wavemeter reading", run));
    }
    r.flip = fit_flip_scan(*b.up, *b.down, cfg.prior, mcmc,
                           derive_seed(seed, static_cast<std::uint32_t>(run)));
    r.echo_before = fit_echo_scan(*b.echo[0], cfg.echo_fit);
    r.echo_after = fit_echo_scan(*b.echo[1], cfg.echo_fit);

    const auto& s1 = r.echo_before.at("stark");
    const auto& s2 = r.echo_after.at("stark");
    RunEstimate& e = r.estimate;
    e.run = run;
    e.detuning_label = r.detuning_label;
    e.optical_frequency = *b.up->metadata.optical_frequency;
    e.side = detuning.side();
    // Bracketing scans: their mean is the Stark shift at mid-run.
    e.stark = {0.5 * (s1.median + s2.median), 0.5 * std::hypot(s1.sigma(), s2.sigma())};
    const auto& dr = r.flip.at("delta_r");
    const auto& lb = r.flip.at("leak_b");
    e.delta_r = {dr.median, dr.sigma()};
    e.leak_b = {lb.median, lb.sigma()};
  });

  std::vector<ResonancePoint> points;
  for (const auto& r : out.runs) {
    const auto& e = r.estimate;
    points.push_back({e.optical_frequency, e.side, e.stark.value, e.stark.sigma, e.delta_r.value,
                      e.delta_r.sigma});
  }
  out.resonance = fit_resonance(points);
  return out;
}

FinalResults derive_campaign(const Config& cfg, const std::vector<RunEstimate>& estimates,
                             const ResonanceFit& resonance) {
  return derive_results(estimates, resonance, cfg.ledger, cfg.constants);
}

int run_command(const std::string& command, const CommandOptions& options, std::ostream& err) {
  try {
    if (command != "simulate" && command != "fit" && command != "derive" && command != "report") {
      throw InputError("unknown command '" + command + "'");
    }
    if (options.out.empty()) throw ConfigError("--out", "output directory is required");
    const Config cfg = load_config(options.config);
    const std::uint64_t seed = options.seed.value_or(cfg.seed);
    const unsigned threads = std::max(1u, options.threads.value_or(cfg.threads));

    if (command == "simulate") command_simulate(cfg, options, seed, threads);
    if (command == "fit") command_fit(cfg, options, seed, threads);
    if (command == "derive") command_derive(cfg, options, seed);
    if (command == "report") command_report(cfg, options);
    std::error_code ec;
    fs::remove(options.out / "error.json", ec);
    return 0;
  } catch (const ConfigError& e) {
    write_error(options, command,
                {{"command", command}, {"error", e.kind()}, {"field", e.field()},
                 {"message", e.what()}},
                err);
    return 2;
  } catch (const Error& e) {
    write_error(options, command, {{"command", command}, {"error", e.kind()}, {"message", e.what()}},
                err);
    return e.kind() == std::string("input") ? 2 : 1;
  } catch (const std::exception& e) {
    write_error(options, command, {{"command", command}, {"error", "internal"}, {"message", e.what()}},
                err);
    return 1;
  }
}

}  // namespace iondyne
