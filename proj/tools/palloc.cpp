#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "palloc/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Distributed resource allocation over passive agents"};
  app.require_subcommand(1);

  palloc::cli::RunOptions opt;
  std::vector<std::string> targets;
  std::string out_dir = "out";
  auto* run = app.add_subcommand("run", "Run presets (inventory, chua_average, nonminphase) or config files");
  run->add_option("targets", targets, "Preset names, 'custom <file>', or config file paths")->required();
  run->add_option("--seed", opt.seed, "Seed for initial conditions and disturbance phases");
  run->add_option("--dt", opt.dt, "Integration step");
  run->add_option("--horizon", opt.horizon, "Simulated time");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--record-every", opt.record_every, "Record every N steps")->check(CLI::PositiveNumber);
  run->add_option("--override-gamma", opt.override_gamma, "Use this gamma even below the gain bound");
  run->add_option("--jobs", opt.jobs, "Run up to N targets in parallel")->check(CLI::PositiveNumber);

  std::string csv;
  auto* report = app.add_subcommand("report", "Per-phase error statistics of a run CSV");
  report->add_option("csv", csv, "CSV written by run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : palloc::cli::kError;
  }

  if (*run) {
    opt.out = out_dir;
    return palloc::cli::run(targets, opt, std::cout);
  }
  return palloc::cli::report(csv, std::cout);
}
