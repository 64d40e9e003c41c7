#include <CLI11.hpp>
#include <iostream>

#include "rspnet/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"superimposed-pilot receiver simulator: trains the two-stage "
               "neural receiver, sweeps NMSE/BER against classical baselines "
               "and reports complexity/energy/runtime accounting"};
  app.require_subcommand(1);

  std::string config_path;
  rspnet::cli::CliOverrides ov;

  auto add_common = [&](CLI::App* cmd, bool with_train_flags) {
    cmd->add_option("--config", config_path, "experiment config file (INI)");
    cmd->add_option("--out", ov.out_dir, "output directory");
    cmd->add_option("--seed", ov.seed, "master seed");
    cmd->add_option("--workers", ov.workers, "worker threads");
    cmd->add_option("--scale", ov.scale, "dataset scale: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    if (with_train_flags) {
      cmd->add_option("--epochs-ce", ov.epochs_ce, "override CE-net epochs");
      cmd->add_option("--epochs-fus", ov.epochs_fus, "override FUS-net epochs");
    }
  };

  auto* train = app.add_subcommand("train", "train both nets per config (one pair per sweep cell)");
  add_common(train, true);
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo NMSE/BER sweep using trained checkpoints");
  add_common(sweep, false);
  auto* analyze = app.add_subcommand("analyze", "complexity, energy and runtime accounting");
  add_common(analyze, false);
  auto* selftest = app.add_subcommand("selftest", "run the built-in property checks");
  bool corrupt_grad = false;
  selftest->add_flag("--corrupt-grad", corrupt_grad,
                     "negative control: corrupt one gradient, expect a failure")
      ->group("");  // hidden, test hook only

  CLI11_PARSE(app, argc, argv);

  try {
    if (selftest->parsed()) return rspnet::cli::cmd_selftest(corrupt_grad, std::cout);
    const auto cfg = rspnet::cli::resolve_config(config_path, ov);
    if (train->parsed()) return rspnet::cli::cmd_train(cfg, std::cout, std::cerr);
    if (sweep->parsed()) return rspnet::cli::cmd_sweep(cfg, std::cout, std::cerr);
    if (analyze->parsed()) return rspnet::cli::cmd_analyze(cfg, std::cout, std::cerr);
  } catch (const rspnet::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
