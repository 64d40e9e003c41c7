#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rspnet/channel.hpp"
#include "rspnet/estimators.hpp"
#include "rspnet/models.hpp"
#include "rspnet/waveform.hpp"

namespace rspnet::pipeline {

/// Fixed stream kinds mixed into derived RNG streams so that datasets,
/// training, calibration and sweeps never collide.
namespace stream {
inline constexpr std::uint64_t kCeTrain = 1;
inline constexpr std::uint64_t kCeVal = 2;
inline constexpr std::uint64_t kFusTrain = 3;
inline constexpr std::uint64_t kFusVal = 4;
inline constexpr std::uint64_t kSweep = 5;
inline constexpr std::uint64_t kShuffle = 6;
inline constexpr std::uint64_t kInitCe = 7;
inline constexpr std::uint64_t kInitFus = 8;
inline constexpr std::uint64_t kCalibration = 9;
inline constexpr std::uint64_t kBench = 10;
}  // namespace stream

/// Everything the transceiver chain needs besides the nets.
struct SystemConfig {
  channel::ChannelConfig channel;
  waveform::PowerSplit split;
  int zc_root = 1;
  channel::PhaseMode phase_mode = channel::PhaseMode::kUniformRandom;
  bool ls_normalized = true;  ///< least-squares convention used by the chain

  Eigen::VectorXcd pilot() const;
  void validate() const;
};

struct TrainConfig {
  int n_train = 20000;
  int n_val = 4000;
  int batch = 80;
  int epochs_ce = 40;
  int epochs_fus = 100;
  double lr = 1e-3;
  double l2_ce = 1e-4;
  double l2_fus = 1e-4;
  std::vector<double> snr_grid_db = {0, 3, 6, 9, 12, 15, 18};  ///< mixed-SNR training grid
  std::uint64_t seed = 1;

  void validate() const;
};

/// Row-per-sample supervised dataset plus bookkeeping about how each
/// sample was generated.
struct Dataset {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd labels;
  struct Meta {
    double snr_db = 0.0;
  };
  std::vector<Meta> meta;

  Eigen::Index rows() const { return inputs.rows(); }
};

/// Per-epoch loss trace; entry 0 is evaluated before any update.
struct LossHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
};

double nmse(const Eigen::VectorXcd& h_hat, const Eigen::VectorXcd& h_true);
double ber(const std::vector<std::uint8_t>& detected, const std::vector<std::uint8_t>& sent);

/// Supervised pairs for the channel-estimation net: input = reshaped LS
/// estimate, label = reshaped true channel. SNR per sample is uniform
/// over the training grid; every sample draws a fresh channel and frame
/// from its own derived stream, so the result is independent of workers.
Dataset gen_ce_dataset(const TrainConfig& tc, const SystemConfig& sys, int count,
                       std::uint64_t stream_kind, int workers);

/// Supervised pairs for the fusion net: input = [coarse data estimate via
/// trained CE net + ZF + pilot removal; raw received], label = reshaped
/// clean data symbols. Throws unless the CE net is trained.
Dataset gen_fus_dataset(const TrainConfig& tc, const models::CeNet& ce,
                        const SystemConfig& sys, int count, std::uint64_t stream_kind,
                        int workers);

/// Mini-batch training loop: shuffles without replacement each epoch,
/// Adam updates, records mean step loss and full validation loss per
/// epoch. Throws std::runtime_error on divergence (non-finite loss).
LossHistory train_mlp(nn::Mlp& net, const Dataset& train_set, const Dataset& val_set,
                      int epochs, double lr, int batch, Rng& rng);

/// Dataset generation + training for each net, wiring seeds and streams
/// from the configs. Marks the model trained.
LossHistory train_ce_net(models::CeNet& model, const Dataset& train_set,
                         const Dataset& val_set, const TrainConfig& tc);
LossHistory train_fus_net(models::FusNet& model, const Dataset& train_set,
                          const Dataset& val_set, const TrainConfig& tc);

/// One pass of the deployed receiver over a frame. Stage names land in
/// `trace` when provided, in execution order.
struct TestPhaseResult {
  Eigen::VectorXcd h_ls;
  Eigen::VectorXcd h_ce;
  Eigen::VectorXcd s_coarse;
  Eigen::VectorXcd s_fus;
  std::vector<std::uint8_t> detected_bits;
};

TestPhaseResult run_test_phase(const models::CeNet& ce, const models::FusNet& fus,
                               const waveform::Frame& frame, bool ls_normalized = true,
                               std::vector<std::string>* trace = nullptr);

enum class Method { kLsCe, kMmseCe, kCeNet, kMmseCeMmseSd, kCeNetZf, kProposed };

const std::vector<Method>& all_methods();
std::string method_name(Method m);

struct SweepRow {
  double snr_db = 0.0;
  double lambda = 0.0;
  int n_taps = 0;
  std::string method;
  double nmse = 0.0;
  double ber = 0.0;
  long n_frames = 0;
};

/// Trained artifacts for one (lambda, L) cell.
struct CellModels {
  models::CeNet ce;
  models::FusNet fus;
  Eigen::MatrixXcd channel_cov;
};

/// Monte-Carlo evaluation of every method over one cell. All methods see
/// identical frames. Rows come out ordered by SNR then method.
std::vector<SweepRow> evaluate_cell(const SystemConfig& sys, const CellModels& cell,
                                    const std::vector<Method>& methods,
                                    const std::vector<double>& snr_grid_db, int n_frames,
                                    std::uint64_t seed, int workers);

/// Full (lambda, L) grid sweep. `provider` supplies the trained cell
/// artifacts; the sweep itself stays deterministic in (configs, seed).
std::vector<SweepRow> evaluate_sweep(
    const SystemConfig& base, const std::vector<Method>& methods,
    const std::vector<double>& snr_grid_db, const std::vector<double>& lambda_grid,
    const std::vector<int>& taps_grid, int n_frames, std::uint64_t seed, int workers,
    const std::function<CellModels(const SystemConfig&)>& provider);

/// ZF + pilot removal + hard slicing with an externally supplied channel
/// estimate. With the true channel this recovers noise-free frames
/// exactly; it is also the bit-detection completion for estimator-only
/// methods in sweeps.
std::vector<std::uint8_t> detect_zf_cancel(const waveform::Frame& frame,
                                           const Eigen::VectorXcd& h_est);

/// Runs count jobs on up to `workers` threads in contiguous chunks.
/// Results must be written by index; chunking never changes them.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

}  // namespace rspnet::pipeline
