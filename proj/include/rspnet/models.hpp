#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "rspnet/mlp.hpp"
#include "rspnet/rng.hpp"

namespace rspnet::models {

/// Channel-estimation net: 2N -> 6N -> 4N -> 2N, ReLU/ReLU/linear, batch
/// norm on the input. Maps a reshaped LS estimate to a refined estimate.
struct CeNet {
  nn::Mlp net;
  int n_subcarriers = 0;
  bool trained = false;

  static CeNet create(int n_subcarriers, double l2, Rng& rng);
};

/// Fusion net: 4N -> 8N -> 2N, ReLU/linear, batch norm on the input.
/// Maps [coarse data estimate; raw received] to the data symbols.
struct FusNet {
  nn::Mlp net;
  int n_subcarriers = 0;
  bool trained = false;

  static FusNet create(int n_subcarriers, double l2, Rng& rng);
};

/// [Re(v); Im(v)] stacked, length 2N.
Eigen::VectorXd complex_to_real(const Eigen::VectorXcd& v);

/// Inverse of complex_to_real; length must be even.
Eigen::VectorXcd real_to_complex(const Eigen::VectorXd& v);

/// FUS-Net input: [Re(s); Im(s); Re(y); Im(y)], length 4N.
Eigen::VectorXd splice_fus_input(const Eigen::VectorXcd& s_coarse,
                                 const Eigen::VectorXcd& y);

/// Single-vector inference wrappers (running batch-norm statistics).
Eigen::VectorXcd ce_net_infer(const CeNet& model, const Eigen::VectorXcd& h_ls);
Eigen::VectorXcd fus_net_infer(const FusNet& model, const Eigen::VectorXd& s_in);

struct ComplexityCount {
  std::int64_t weights = 0;          ///< dense weights + biases, both nets
  std::int64_t weights_ex_bias = 0;  ///< dense weights only (92 N^2)
  std::int64_t flops = 0;            ///< 2*in*out per layer + 4 per BN feature
  std::int64_t reported_weights = 0; ///< aggregate figure 28 N^2 + 8 N
  std::int64_t reported_flops = 0;   ///< aggregate figure 56 N^2 - 8 N
  std::int64_t reported_total = 0;   ///< aggregate figure 84 N^2
};

/// Walks the layer list of both nets and counts parameters and multiply
/// -accumulate flops directly; also evaluates the aggregate closed forms
/// used for comparisons. The two do not coincide; both are reported.
ComplexityCount count_params_flops(const CeNet& ce, const FusNet& fus);

void save(const CeNet& model, const std::string& path);
void save(const FusNet& model, const std::string& path);

/// Loaders validate the architecture tag and layer shapes; a checkpoint is
/// assumed to hold trained parameters.
CeNet load_ce(const std::string& path);
FusNet load_fus(const std::string& path);

}  // namespace rspnet::models
