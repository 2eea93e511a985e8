#include "iondyne/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "iondyne/error.hpp"
#include "iondyne/units.hpp"

namespace iondyne {

LaserField LaserConfig::field(double detuning) const {
  return LaserField::from_weights(detuning, rabi, sigma_plus_fraction, sigma_minus_fraction,
                                  pi_fraction);
}

const DetuningConfig& CampaignConfig::detuning(const std::string& label) const {
  for (const auto& d : detunings) {
    if (d.label == label) return d;
  }
  throw ConfigError("campaign.detunings", "unknown detuning label '" + label + "'");
}

namespace {

// Thin wrapper that remembers the key path for error messages.
class Node {
 public:
  Node(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {}

  [[nodiscard]] bool has(const std::string& key) const {
    return node_.IsMap() && node_[key].IsDefined() && !node_[key].IsNull();
  }
  [[nodiscard]] Node child(const std::string& key) const {
    if (!has(key)) throw ConfigError(join(key), "required key is missing");
    return {node_[key], join(key)};
  }
  [[nodiscard]] const std::string& path() const { return path_; }
  [[nodiscard]] const YAML::Node& raw() const { return node_; }

  template <typename T>
  T as() const {
    try {
      return node_.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(path_, "has the wrong type");
    }
  }
  template <typename T>
  T get(const std::string& key) const {
    return child(key).as<T>();
  }
  template <typename T>
  T get_or(const std::string& key, T fallback) const {
    return has(key) ? child(key).as<T>() : fallback;
  }

  double positive(const std::string& key) const {
    const double v = get<double>(key);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(join(key), "must be positive");
    return v;
  }
  double non_negative(const std::string& key, double fallback) const {
    const double v = get_or<double>(key, fallback);
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(join(key), "must be >= 0");
    return v;
  }
  double probability(const std::string& key, double fallback) const {
    const double v = get_or<double>(key, fallback);
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(join(key), "must lie in [0, 1]");
    return v;
  }
  long count(const std::string& key, long fallback) const {
    const long v = get_or<long>(key, fallback);
    if (v < 1) throw ConfigError(join(key), "must be >= 1");
    return v;
  }

  [[nodiscard]] std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  YAML::Node node_;
  std::string path_;
};

// Either an explicit list `<name>_<unit>` or an arithmetic grid
// {points, spacing_<unit>, start_<unit>}.
std::vector<double> read_durations(const Node& section, const std::string& unit, double scale) {
  const std::string list_key = "durations_" + unit;
  std::vector<double> out;
  if (section.has(list_key)) {
    const Node list = section.child(list_key);
    if (!list.raw().IsSequence()) throw ConfigError(list.path(), "must be a list");
    for (const auto& v : list.as<std::vector<double>>()) out.push_back(v * scale);
    if (out.empty()) throw ConfigError(list.path(), "must not be empty");
  } else if (section.has("points")) {
    const long points = section.count("points", 1);
    const double spacing = section.positive("spacing_" + unit) * scale;
    const double start = section.non_negative("start_" + unit, 0.0) * scale;
    for (long i = 0; i < points; ++i) out.push_back(start + spacing * static_cast<double>(i));
  } else {
    throw ConfigError(section.join(list_key), "required key is missing (or give points/spacing_" +
                                                  unit + ")");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] >= 0.0)) throw ConfigError(section.join(list_key), "durations must be >= 0");
    if (i > 0 && !(out[i] > out[i - 1])) {
      throw ConfigError(section.join(list_key), "durations must be strictly increasing");
    }
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file) {
  std::filesystem::path p(file);
  return p.is_absolute() || base.empty() ? p : base / p;
}

SinkReadout read_sink(const Node& spam) {
  const auto text = spam.get_or<std::string>("sink_readout", "bright");
  if (text == "bright") return SinkReadout::bright;
  if (text == "dark") return SinkReadout::dark;
  throw ConfigError(spam.join("sink_readout"), "must be 'bright' or 'dark'");
}

// leak_b directly, or via branching_fraction.
Uncertain read_leak(const Node& section) {
  if (section.has("leak_b")) {
    return {section.non_negative("leak_b", 0.0), section.non_negative("leak_b_unc", 0.0)};
  }
  if (section.has("branching_fraction")) {
    const double bf = section.get<double>("branching_fraction");
    if (!(bf > 0.0 && bf <= 1.0)) {
      throw ConfigError(section.join("branching_fraction"), "must lie in (0, 1]");
    }
    const double bf_unc = section.non_negative("branching_fraction_unc", 0.0);
    // b = 3 (1/BF - 1), db/dBF = -3 / BF^2
    return {3.0 * (1.0 / bf - 1.0), 3.0 * bf_unc / (bf * bf)};
  }
  throw ConfigError(section.join("leak_b"), "give leak_b or branching_fraction");
}

}  // namespace

void Config::require_simulation() const {
  if (!truth) throw ConfigError("truth", "required section is missing");
  if (!laser) throw ConfigError("laser", "required section is missing");
  if (!campaign) throw ConfigError("campaign", "required section is missing");
  if (flip_durations.empty()) throw ConfigError("flip_scan.durations_us", "must not be empty");
  if (echo_durations.empty()) throw ConfigError("echo_scan.durations_ns", "must not be empty");
}

void Config::require_fit() const {
  if (!campaign) throw ConfigError("campaign", "required section is missing");
}

RunSchedule Config::schedule() const {
  require_simulation();
  std::vector<std::string> labels;
  for (const auto& d : campaign->detunings) labels.push_back(d.label);
  RunSchedule s = RunSchedule::round_robin(labels, campaign->runs);
  s.flip_durations = flip_durations;
  s.flip_shots = flip_shots;
  s.echo_durations = echo_durations;
  s.echo_shots = echo_shots;
  s.echo_signal = echo_signal;
  s.drift.omega2_slope_per_block = campaign->drift_per_block;
  s.wavemeter_sigma = campaign->wavemeter_sigma;
  s.max_pi_fraction = laser->max_pi_fraction;
  return s;
}

std::vector<DetuningSetting> Config::detuning_settings() const {
  require_simulation();
  std::vector<DetuningSetting> out;
  for (const auto& d : campaign->detunings) {
    out.push_back({d.label, laser->field(d.detuning), campaign->resonance + d.detuning});
  }
  return out;
}

Config parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root_yaml;
  try {
    root_yaml = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<root>", std::string("YAML parse error: ") + e.what());
  }
  if (!root_yaml.IsMap()) throw ConfigError("<root>", "configuration must be a mapping");
  const Node root(root_yaml, "");
  Config cfg;

  cfg.seed = root.get_or<std::uint64_t>("seed", 1);
  cfg.threads = static_cast<unsigned>(root.count("threads", 1));

  if (root.has("constants")) {
    const Node c = root.child("constants");
    if (c.has("file")) {
      try {
        cfg.constants = PhysicalConstantsTable::load(resolve(base_dir, c.get<std::string>("file")));
      } catch (const InputError& e) {
        throw ConfigError(c.join("file"), e.what());
      }
    }
    if (c.has("lambda_ps_nm")) {
      cfg.constants = cfg.constants.with_lambda_ps(c.positive("lambda_ps_nm") * 1e-9);
    }
  }

  if (root.has("truth")) {
    const Node t = root.child("truth");
    const double gamma = angular_from_mhz(t.positive("gamma_ps_mhz"));
    cfg.truth = DecayConstants::from_gamma_and_leak(gamma, read_leak(t).value);
  }

  if (root.has("laser")) {
    const Node l = root.child("laser");
    LaserConfig laser;
    laser.rabi = angular_from_mhz(l.positive("rabi_mhz"));
    laser.sigma_plus_fraction = l.probability("sigma_plus_fraction", 1.0);
    laser.sigma_minus_fraction = l.probability("sigma_minus_fraction", 0.0);
    laser.pi_fraction = l.probability("pi_fraction", 0.0);
    laser.max_pi_fraction = l.probability("max_pi_fraction", kDefaultMaxPiFraction);
    if (laser.sigma_plus_fraction + laser.sigma_minus_fraction + laser.pi_fraction <= 0.0) {
      throw ConfigError(l.join("sigma_plus_fraction"), "polarization fractions sum to zero");
    }
    cfg.laser = laser;
  }

  if (root.has("campaign")) {
    const Node c = root.child("campaign");
    CampaignConfig campaign;
    campaign.runs = static_cast<std::size_t>(c.count("runs", 1));
    campaign.resonance = angular_from_thz(c.positive("resonance_thz"));
    const Node list = c.child("detunings");
    if (!list.raw().IsSequence() || list.raw().size() == 0) {
      throw ConfigError(list.path(), "must be a non-empty list");
    }
    for (std::size_t i = 0; i < list.raw().size(); ++i) {
      const Node item(list.raw()[i], list.path() + "[" + std::to_string(i) + "]");
      DetuningConfig d;
      d.label = item.get<std::string>("label");
      d.detuning = angular_from_ghz(item.get<double>("detuning_ghz"));
      if (d.detuning == 0.0) throw ConfigError(item.join("detuning_ghz"), "must be non-zero");
      if (d.label.empty() || d.label.find_first_of(" ,=\n") != std::string::npos) {
        throw ConfigError(item.join("label"), "must be non-empty without spaces, ',' or '='");
      }
      for (const auto& existing : campaign.detunings) {
        if (existing.label == d.label) throw ConfigError(item.join("label"), "duplicate label");
      }
      campaign.detunings.push_back(d);
    }
    campaign.wavemeter_sigma = angular_from_mhz(c.non_negative("wavemeter_sigma_mhz", 0.0));
    campaign.drift_per_block = c.get_or<double>("drift_per_block", 0.0);
    cfg.campaign = campaign;
  }

  if (root.has("spam")) {
    const Node s = root.child("spam");
    cfg.sink = read_sink(s);
    const double up = s.probability("dark_given_up", 0.99);
    const double down = s.probability("dark_given_down", 0.01);
    if (!(up > down)) throw ConfigError(s.join("dark_given_up"), "must exceed dark_given_down");
    cfg.spam = SpamModel::with_sink(up, down, cfg.sink);
  }
  cfg.prior.sink = cfg.sink;

  if (root.has("flip_scan")) {
    const Node f = root.child("flip_scan");
    cfg.flip_durations = read_durations(f, "us", 1e-6);
    cfg.flip_shots = f.count("shots", 2500);
  }
  if (root.has("echo_scan")) {
    const Node e = root.child("echo_scan");
    cfg.echo_durations = read_durations(e, "ns", 1e-9);
    cfg.echo_shots = e.count("shots", 150);
    cfg.echo_signal.contrast = e.get_or<double>("contrast", 0.45);
    cfg.echo_signal.offset = e.probability("offset", 0.5);
    cfg.echo_signal.phase = e.get_or<double>("phase_rad", 0.0);
    cfg.echo_signal.decay_rate = e.non_negative("decay_per_us", 0.0) * 1e6;
    if (!(cfg.echo_signal.contrast >= 0.0 && cfg.echo_signal.contrast <= 0.5)) {
      throw ConfigError(e.join("contrast"), "must lie in [0, 0.5]");
    }
  }

  if (root.has("mcmc")) {
    const Node m = root.child("mcmc");
    cfg.mcmc.chains = static_cast<int>(m.count("chains", cfg.mcmc.chains));
    cfg.mcmc.burn_in = static_cast<int>(m.get_or<long>("burn_in", cfg.mcmc.burn_in));
    if (cfg.mcmc.burn_in < 0) throw ConfigError(m.join("burn_in"), "must be >= 0");
    cfg.mcmc.draws_per_chain = static_cast<int>(m.count("draws_per_chain", cfg.mcmc.draws_per_chain));
    if (cfg.mcmc.draws_per_chain < 4) throw ConfigError(m.join("draws_per_chain"), "must be >= 4");
    cfg.mcmc.rhat_threshold = m.get_or<double>("rhat_threshold", cfg.mcmc.rhat_threshold);
    if (!(cfg.mcmc.rhat_threshold > 1.0)) throw ConfigError(m.join("rhat_threshold"), "must exceed 1");
  }
  if (root.has("priors")) {
    const Node p = root.child("priors");
    cfg.prior.rate_min = p.get_or<double>("rate_min_per_s", cfg.prior.rate_min);
    cfg.prior.rate_max = p.get_or<double>("rate_max_per_s", cfg.prior.rate_max);
    cfg.prior.leak_b_max = p.get_or<double>("leak_b_max", cfg.prior.leak_b_max);
    try {
      cfg.prior.validate();
    } catch (const DomainError& e) {
      throw ConfigError(p.path(), e.what());
    }
  }
  if (root.has("echo_fit")) {
    const Node e = root.child("echo_fit");
    cfg.echo_fit.min_periods = e.non_negative("min_periods", cfg.echo_fit.min_periods);
    cfg.echo_fit.ambiguity_ratio = e.probability("ambiguity_ratio", cfg.echo_fit.ambiguity_ratio);
  }

  if (root.has("derive")) {
    const Node d = root.child("derive");
    if (d.has("ledger")) {
      try {
        cfg.ledger = CorrectionLedger::load_csv(resolve(base_dir, d.get<std::string>("ledger")));
      } catch (const Error& e) {
        throw ConfigError(d.join("ledger"), e.what());
      }
    }
    if (d.has("measured")) {
      const Node m = d.child("measured");
      MeasuredInputs in;
      const double gamma = angular_from_mhz(m.positive("gamma_ps_mhz"));
      in.gamma_ps = {gamma, gamma * m.non_negative("gamma_ps_rel_unc", 0.0)};
      in.leak_b = read_leak(m);
      in.corrections_applied = m.get_or<bool>("corrections_applied", true);
      cfg.measured = in;
    }
  }

  if (cfg.campaign && cfg.laser) {
    for (const auto& d : cfg.campaign->detunings) {
      try {
        (void)cfg.laser->field(d.detuning);
      } catch (const DomainError& e) {
        throw ConfigError("laser", e.what());
      }
    }
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  Config cfg = parse_config(buffer.str(), path.parent_path());
  cfg.source = path;
  return cfg;
}

}  // namespace iondyne
