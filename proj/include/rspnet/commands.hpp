#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "rspnet/analysis.hpp"
#include "rspnet/config.hpp"

namespace rspnet::cli {

/// Command-line overrides applied on top of the config file.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> scale;
  std::optional<int> workers;
  std::optional<int> epochs_ce;
  std::optional<int> epochs_fus;
};

/// Loads the config (built-in defaults when path is empty) and applies
/// overrides. Throws ConfigError on any problem.
ExperimentConfig resolve_config(const std::string& config_path, const CliOverrides& ov);

/// Cell naming shared by train and sweep: empty for a single-cell grid,
/// "_lam<lambda>_L<taps>" otherwise.
std::string cell_suffix(const ExperimentConfig& cfg, double lambda, int taps);

/// System config specialised to one (lambda, taps) cell.
pipeline::SystemConfig cell_system(const ExperimentConfig& cfg, double lambda, int taps);

/// Channel covariance for the LMMSE filter of one cell, from a derived
/// calibration stream (depends on the tap count, not on lambda).
Eigen::MatrixXcd cell_covariance(const ExperimentConfig& cfg,
                                 const pipeline::SystemConfig& sys);

struct CellArtifacts {
  models::CeNet ce;
  models::FusNet fus;
  pipeline::LossHistory ce_history;
  pipeline::LossHistory fus_history;
};

/// Fresh-init training of both nets for one cell; pure function of
/// (cfg, cell), no file IO. Progress lines go to `log` when given.
CellArtifacts train_cell(const ExperimentConfig& cfg, const pipeline::SystemConfig& sys,
                         std::ostream* log = nullptr);

/// Loads the trained models of one cell from out_dir as written by
/// cmd_train, and pairs them with the calibration covariance.
pipeline::CellModels load_cell(const ExperimentConfig& cfg, double lambda, int taps);

void write_loss_csv(const pipeline::LossHistory& hist, const std::string& path);
void write_results_csv(const std::vector<pipeline::SweepRow>& rows, const std::string& path);

/// Subcommands; each returns a process exit code:
/// 0 success, 1 config error, 2 runtime failure (e.g. divergence).
int cmd_train(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_analyze(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// Named property checks over the whole stack; prints one PASS/FAIL line
/// per property. Returns 0 when everything passes, 3 otherwise.
/// corrupt_grad deliberately corrupts one gradient inside the gradient
/// check property; the suite must then fail (negative control).
int cmd_selftest(bool corrupt_grad, std::ostream& out);

}  // namespace rspnet::cli
