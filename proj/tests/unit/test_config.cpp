#include <doctest.h>

#include <string>

#include "iondyne/config.hpp"
#include "iondyne/error.hpp"
#include "iondyne/units.hpp"

using namespace iondyne;

namespace {
const std::string kMinimal = R"(
seed: 5
truth: {gamma_ps_mhz: 21.57, branching_fraction: 0.93572}
laser: {rabi_mhz: 450, sigma_plus_fraction: 0.985, sigma_minus_fraction: 0.015}
campaign:
  runs: 4
  resonance_thz: 755.2227
  detunings:
    - {label: red12, detuning_ghz: -12.03}
    - {label: blue11, detuning_ghz: 11.52}
flip_scan: {durations_us: [0, 100, 200, 400], shots: 100}
echo_scan: {points: 120, spacing_ns: 120, shots: 100}
)";

std::string field_of(const std::string& yaml) {
  try {
    (void)parse_config(yaml);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}
}  // namespace

TEST_CASE("minimal configuration") {
  const auto c = parse_config(kMinimal);
  CHECK(c.seed == 5);
  REQUIRE(c.truth);
  CHECK(c.truth->gamma_ps == doctest::Approx(angular_from_mhz(21.57)));
  CHECK(c.truth->branching_fraction() == doctest::Approx(0.93572));
  CHECK(c.flip_durations.size() == 4);
  CHECK(c.flip_durations[3] == doctest::Approx(400e-6));
  CHECK(c.echo_durations.size() == 120);
  CHECK(c.echo_durations[1] == doctest::Approx(120e-9));
  CHECK(c.campaign->detuning("red12").side() == -1);
  CHECK(c.sink == SinkReadout::bright);
  const auto schedule = c.schedule();
  CHECK(schedule.run_labels == std::vector<std::string>{"red12", "blue11", "red12", "blue11"});
  const auto settings = c.detuning_settings();
  CHECK(settings[1].optical_frequency == doctest::Approx(angular_from_thz(755.2227) + angular_from_ghz(11.52)));
}

TEST_CASE("validation errors name the field") {
  CHECK(field_of(replace(kMinimal, "[0, 100, 200, 400]", "[]")) == "flip_scan.durations_us");
  CHECK(field_of(replace(kMinimal, "[0, 100, 200, 400]", "[0, 200, 100]")) == "flip_scan.durations_us");
  CHECK(field_of(replace(kMinimal, "rabi_mhz: 450", "rabi_mhz: -1")) == "laser.rabi_mhz");
  CHECK(field_of(replace(kMinimal, "rabi_mhz: 450", "rabi_mhz: fast")) == "laser.rabi_mhz");
  CHECK(field_of(replace(kMinimal, "detuning_ghz: 11.52", "detuning_ghz: 0")) ==
        "campaign.detunings[1].detuning_ghz");
  CHECK(field_of(replace(kMinimal, "label: blue11", "label: red12")) == "campaign.detunings[1].label");
  CHECK(field_of(replace(kMinimal, "runs: 4", "runs: 0")) == "campaign.runs");
  CHECK(field_of(replace(kMinimal, "shots: 100}\necho", "shots: 0}\necho")) == "flip_scan.shots");
  CHECK(field_of(kMinimal + "spam: {dark_given_up: 0.1, dark_given_down: 0.9}\n") == "spam.dark_given_up");
  CHECK(field_of(kMinimal + "spam: {sink_readout: grey}\n") == "spam.sink_readout");
  CHECK(field_of(kMinimal + "mcmc: {draws_per_chain: 2}\n") == "mcmc.draws_per_chain");
  CHECK(field_of(kMinimal + "derive: {ledger: /nonexistent.csv}\n") == "derive.ledger");
  CHECK(field_of("truth: [1, 2]\n") == "truth.gamma_ps_mhz");
  CHECK(field_of("- a\n- b\n") == "<root>");
  CHECK(field_of("seed: [unclosed\n") == "<root>");
}

TEST_CASE("sections required per command") {
  const auto c = parse_config("seed: 1\n");
  CHECK_THROWS_AS(c.require_simulation(), ConfigError);
  CHECK_THROWS_AS(c.require_fit(), ConfigError);
}

TEST_CASE("shipped configurations load") {
  for (const char* name : {"desk_campaign.yaml", "full_scale.yaml", "published_inputs.yaml"}) {
    CAPTURE(name);
    CHECK_NOTHROW((void)load_config(std::string(IONDYNE_SOURCE_DIR) + "/configs/" + name));
  }
  const auto inputs = load_config(std::string(IONDYNE_SOURCE_DIR) + "/configs/published_inputs.yaml");
  REQUIRE(inputs.measured);
  CHECK(inputs.measured->corrections_applied);
  CHECK(inputs.ledger.rows().size() == 10);
  CHECK(inputs.constants.lambda_ps == doctest::Approx(396.847e-9));
  const auto desk = load_config(std::string(IONDYNE_SOURCE_DIR) + "/configs/desk_campaign.yaml");
  CHECK(desk.campaign->runs == 8);
  CHECK(desk.flip_durations.size() == 30);
  CHECK(desk.flip_shots == 500);
  CHECK(desk.echo_durations.size() == 120);
  CHECK(desk.echo_shots == 100);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS((void)load_config("/nonexistent/config.yaml"), ConfigError);
}
