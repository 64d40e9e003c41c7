#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rspnet/pipeline.hpp"

namespace rspnet::cli {

/// Configuration problems map to exit code 1 at the command layer.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepGrids {
  std::vector<double> snr_db = {0, 3, 6, 9, 12, 15, 18};
  std::vector<double> lambda = {0.1, 0.15, 0.2};
  std::vector<int> taps = {3, 5, 7};
  int n_frames = 2000;
};

struct RunOptions {
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string scale = "desk";  ///< desk | paper
  int workers = 1;
  int calibration_draws = 10000;  ///< channel draws behind the LMMSE covariance
  int bench_frames = 1000;
  int bench_repetitions = 5;
  double bench_snr_db = 12.0;
};

/// Everything a run needs, parsed from a flat INI-style file with
/// [system], [train], [sweep] and [run] sections. Unknown sections or
/// keys are errors; parse(serialize(c)) == c.
struct ExperimentConfig {
  pipeline::SystemConfig system;
  pipeline::TrainConfig train;
  SweepGrids sweep;
  RunOptions run;

  void validate() const;

  /// Training sizes after applying run.scale ("paper" switches to the
  /// full-size sample counts) and propagating the run seed.
  pipeline::TrainConfig effective_train() const;
};

ExperimentConfig default_config();

/// source_name only decorates error messages.
ExperimentConfig parse_config_text(const std::string& text, const std::string& source_name);
ExperimentConfig load_config_file(const std::string& path);

std::string serialize_config(const ExperimentConfig& cfg);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace rspnet::cli
