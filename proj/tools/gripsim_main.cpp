// Command-line front end. Talks to the simulation core exclusively through
// the shared-library C API; exit codes equal the gripsim_status values.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "gripsim.h"

namespace {

int run_command(const std::string& scenario_path, const std::string& out_dir, bool strict,
                int threads, unsigned long long seed, bool sweep) {
  gripsim_scenario* scenario = nullptr;
  gripsim_status status = gripsim_scenario_load(scenario_path.c_str(), &scenario);
  if (status != GRIPSIM_OK) {
    std::fprintf(stderr, "gripsim: %s\n", gripsim_last_error());
    return status;
  }

  gripsim_run_options options{};
  options.strict = strict ? 1 : 0;
  options.threads = threads;
  options.seed = seed;

  status = sweep ? gripsim_sweep(scenario, out_dir.c_str(), &options)
                 : gripsim_run(scenario, out_dir.c_str(), &options);
  if (status != GRIPSIM_OK) std::fprintf(stderr, "gripsim: %s\n", gripsim_last_error());
  gripsim_scenario_free(scenario);
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-static gripper mechanism simulator"};
  app.set_version_flag("--version", std::string(gripsim_version()));
  app.require_subcommand(1);

  std::string scenario_path, out_dir;
  bool strict = false;
  int threads = 1;
  unsigned long long seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    cmd->add_option("--out", out_dir, "Output directory")->required();
    cmd->add_flag("--strict", strict, "Treat validation failures as errors (exit 3)");
    cmd->add_option("--threads", threads, "Sweep worker threads")->default_val(1);
    cmd->add_option("--seed", seed, "Seed for solver multi-start jitter")->default_val(0);
  };

  CLI::App* run = app.add_subcommand("run", "Run a single scenario");
  add_common(run);
  CLI::App* sweep = app.add_subcommand("sweep", "Run a scenario's parameter sweep");
  add_common(sweep);

  CLI11_PARSE(app, argc, argv);

  return run_command(scenario_path, out_dir, strict, threads, seed, sweep->parsed());
}
