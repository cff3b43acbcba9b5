// Command-line front end: run one experiment, verify a guarantee suite, or
// sweep the tuning parameters.
#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mechlab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mechlab: weakest-type mechanisms with side information"};
  app.require_subcommand(1);

  mechlab::CliOptions options;
  std::uint64_t seed = 0;
  long trials = 0;
  int workers = 1;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "master RNG seed");
    cmd->add_option("--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
    cmd->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", options.out_dir, "output directory (default: out)");
  };

  CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("--config", options.config_path, "config file (text or JSON)")->required();
  add_common(run);

  CLI::App* verify = app.add_subcommand("verify", "check a guarantee suite");
  verify
      ->add_option("suite", options.suite,
                   "one of: thm2, thm5, thm6, thm7, thm9, myerson, lp_oracle")
      ->required();
  verify->add_option("--config", options.config_path, "unused; accepted for symmetry");
  add_common(verify);

  CLI::App* sweep = app.add_subcommand("sweep", "tabulate closed forms over a parameter grid");
  sweep->add_option("--config", options.config_path, "config file (text or JSON)")->required();
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* chosen = run->parsed() ? run : (verify->parsed() ? verify : sweep);
  options.command = chosen->get_name();
  if (chosen->count("--seed") > 0) options.seed = seed;
  if (chosen->count("--trials") > 0) options.trials = trials;
  if (chosen->count("--workers") > 0) options.workers = workers;

  return mechlab::run_command(options, std::cout);
}
