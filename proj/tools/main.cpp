#include <cstdint>
#include <iostream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "iondyne/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"iondyne: simulate, fit and derive trapped-ion decay-rate measurements"};
  app.require_subcommand(1, 1);

  iondyne::CommandOptions options;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Generate synthetic shot data into <out>/datasets"},
      {"fit", "Fit flip and echo scans and the resonance into <out>/estimates"},
      {"derive", "Combine estimates (or measured inputs) into <out>/results"},
      {"report", "Write summary tables and plot data into <out>/report"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", options.config, "YAML configuration file")->required();
    sub->add_option("--out", options.out, "Output directory")->required();
    sub->add_option("--seed", seed, "Override the configured seed");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--fixed-clock", options.fixed_clock,
                  "Stamp reports with the epoch for byte-identical output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed") > 0) options.seed = seed;
  if (sub->count("--threads") > 0) options.threads = threads;
  return iondyne::run_command(sub->get_name(), options, std::cerr);
}
