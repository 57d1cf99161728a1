#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ridesim/commands.hpp"
#include "ridesim/errors.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
  bool jobs_set = false;
  bool plots = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_seed, bool with_jobs, bool with_plots) {
  cmd->add_option("-c,--config", args.config_path, "configuration file (defaults when omitted)");
  cmd->add_option("-o,--out", args.out, "output directory")->capture_default_str();
  if (with_seed)
    cmd->add_option("-s,--seed", args.seed, "override the master seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
  if (with_jobs)
    cmd->add_option("-j,--jobs", args.jobs, "worker threads for sweep cells")
        ->each([&args](const std::string&) { args.jobs_set = true; });
  if (with_plots) cmd->add_flag("--plots", args.plots, "also write SVG charts");
}

ridesim::RunConfig load(const CommonArgs& args) {
  std::optional<std::filesystem::path> path;
  if (!args.config_path.empty()) path = args.config_path;
  return ridesim::load_config(path);
}

ridesim::CommandOptions options_from(const CommonArgs& args) {
  ridesim::CommandOptions opt;
  opt.out = args.out;
  if (args.seed_set) opt.seed = args.seed;
  if (args.jobs_set) opt.jobs = args.jobs;
  opt.plots = args.plots;
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ridesim: agent-based two-sided ride-sourcing market simulator"};
  app.require_subcommand(1);

  CommonArgs run_args, calibrate_args, sweep_args, sensitivity_args, validate_args;

  CLI::App* run = app.add_subcommand("run", "simulate one scenario and write trip-level outputs");
  add_common(run, run_args, true, false, false);

  CLI::App* calibrate =
      app.add_subcommand("calibrate", "derive the random-class acceptance probability");
  add_common(calibrate, calibrate_args, false, false, false);

  CLI::App* sweep =
      app.add_subcommand("sweep", "run the behavioural-share x replication experiment");
  add_common(sweep, sweep_args, false, true, true);

  CLI::App* sensitivity =
      app.add_subcommand("sensitivity", "acceptance probability curves per choice attribute");
  add_common(sensitivity, sensitivity_args, false, false, true);

  CLI::App* validate = app.add_subcommand("validate-graph", "check the configured road network");
  add_common(validate, validate_args, false, false, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return ridesim::cmd_run(load(run_args), options_from(run_args));
    if (calibrate->parsed())
      return ridesim::cmd_calibrate(load(calibrate_args), options_from(calibrate_args));
    if (sweep->parsed()) return ridesim::cmd_sweep(load(sweep_args), options_from(sweep_args));
    if (sensitivity->parsed())
      return ridesim::cmd_sensitivity(load(sensitivity_args), options_from(sensitivity_args));
    if (validate->parsed()) return ridesim::cmd_validate_graph(load(validate_args));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
