#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rspnet/rng.hpp"

namespace rspnet::nn {

enum class Activation { kRelu, kLinear };

struct DenseLayer {
  Eigen::MatrixXd weights;  ///< in x out
  Eigen::VectorXd biases;   ///< out
  Activation act = Activation::kLinear;
};

/// Input-side batch normalization with learnable scale/shift. Training
/// uses batch statistics (biased variance) and refreshes the running
/// estimates; inference uses the running estimates only.
struct BatchNorm {
  Eigen::VectorXd gamma, beta;
  Eigen::VectorXd running_mean, running_var;
  double momentum = 0.9;  ///< retained fraction of the old running value
  double epsilon = 1e-5;
};

/// Fully connected net: batch-norm on the raw input, then dense layers.
struct Mlp {
  BatchNorm bn;
  std::vector<DenseLayer> layers;
  double l2 = 0.0;  ///< weight-decay coefficient on dense weights only

  int input_dim() const;
  int output_dim() const;
  std::int64_t parameter_count() const;
  void validate() const;  ///< throws on dim mismatch or non-finite params
};

/// Glorot-uniform weights (+-sqrt(6/(in+out))), zero biases, identity
/// batch norm. dims = {d0, d1, ..., dL}; acts has one entry per layer.
Mlp make_mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
             double l2, Rng& rng);

/// Intermediate values of one training-mode forward pass, consumed by
/// backward(). activations[0] is the batch-norm output.
struct ForwardCache {
  Eigen::MatrixXd x_hat;  ///< normalized input before gamma/beta
  std::vector<Eigen::MatrixXd> activations;
  std::vector<Eigen::MatrixXd> pre_activations;
  bool valid = false;
};

/// Inference-mode forward pass (running batch-norm statistics).
/// batch is samples x input_dim.
Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& batch);

/// Single-sample inference for the per-frame receiver chains. Same math as
/// the inference-mode forward() but skips the full parameter scan and keeps
/// temporaries to a minimum; the net must already be valid.
Eigen::RowVectorXd infer_row(const Mlp& net, const Eigen::RowVectorXd& input);

/// Training-mode forward pass: batch statistics, running stats updated,
/// cache filled for backward(). Requires at least 2 rows.
Eigen::MatrixXd forward(Mlp& net, const Eigen::MatrixXd& batch, ForwardCache& cache);

/// Mean squared error over the batch plus l2 * sum ||W||_F^2:
/// (1/S) * sum_s ||label_s - pred_s||^2, S = number of rows.
double loss_mse_l2(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& label,
                   const Mlp& net);

struct Gradients {
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;
  Eigen::VectorXd d_gamma, d_beta;
};

/// Exact gradients of loss_mse_l2 w.r.t. every learnable parameter, from
/// the cache of the matching training-mode forward pass.
Gradients backward(const Mlp& net, const ForwardCache& cache, const Eigen::MatrixXd& label);

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.99;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step_count = 0;
  std::vector<Eigen::MatrixXd> m_weights, v_weights;
  std::vector<Eigen::VectorXd> m_biases, v_biases;
  Eigen::VectorXd m_gamma, v_gamma, m_beta, v_beta;
};

/// One bias-corrected Adam update. Moment buffers are allocated on first
/// use. Throws on non-finite gradients (the step is rejected) and on
/// shape mismatches.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  bool passed = false;
};

/// Compares backward() against central finite differences of the full
/// loss, parameter by parameter. step is the FD half-step.
GradCheckResult grad_check(const Mlp& net, const Eigen::MatrixXd& batch,
                           const Eigen::MatrixXd& label, double step = 1e-5,
                           double tolerance = 1e-4);

/// Plain-text checkpoint: versioned header (architecture, activations,
/// batch-norm state) followed by one parameter value per line. Values are
/// written with shortest round-trip formatting, so save/load/save is
/// bit-identical.
void save_checkpoint(const Mlp& net, const std::string& arch_tag, int n_subcarriers,
                     const std::string& path);

struct Checkpoint {
  Mlp net;
  std::string arch_tag;
  int n_subcarriers = 0;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace rspnet::nn
