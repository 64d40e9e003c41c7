#include "rspnet/models.hpp"

#include <stdexcept>

namespace rspnet::models {

namespace {

void check_ce_shape(const nn::Mlp& net, int n) {
  const std::vector<int> dims = {2 * n, 6 * n, 4 * n, 2 * n};
  const std::vector<nn::Activation> acts = {nn::Activation::kRelu, nn::Activation::kRelu,
                                            nn::Activation::kLinear};
  if (net.layers.size() != 3) throw std::invalid_argument("ce-net: expected 3 layers");
  for (std::size_t i = 0; i < 3; ++i) {
    if (net.layers[i].weights.rows() != dims[i] || net.layers[i].weights.cols() != dims[i + 1])
      throw std::invalid_argument("ce-net: layer " + std::to_string(i) + " has wrong shape");
    if (net.layers[i].act != acts[i])
      throw std::invalid_argument("ce-net: layer " + std::to_string(i) + " has wrong activation");
  }
}

void check_fus_shape(const nn::Mlp& net, int n) {
  const std::vector<int> dims = {4 * n, 8 * n, 2 * n};
  const std::vector<nn::Activation> acts = {nn::Activation::kRelu, nn::Activation::kLinear};
  if (net.layers.size() != 2) throw std::invalid_argument("fus-net: expected 2 layers");
  for (std::size_t i = 0; i < 2; ++i) {
    if (net.layers[i].weights.rows() != dims[i] || net.layers[i].weights.cols() != dims[i + 1])
      throw std::invalid_argument("fus-net: layer " + std::to_string(i) + " has wrong shape");
    if (net.layers[i].act != acts[i])
      throw std::invalid_argument("fus-net: layer " + std::to_string(i) + " has wrong activation");
  }
}

}  // namespace

CeNet CeNet::create(int n_subcarriers, double l2, Rng& rng) {
  if (n_subcarriers <= 0) throw std::invalid_argument("ce-net: n_subcarriers must be positive");
  CeNet m;
  m.n_subcarriers = n_subcarriers;
  const int n = n_subcarriers;
  m.net = nn::make_mlp({2 * n, 6 * n, 4 * n, 2 * n},
                       {nn::Activation::kRelu, nn::Activation::kRelu, nn::Activation::kLinear},
                       l2, rng);
  return m;
}

FusNet FusNet::create(int n_subcarriers, double l2, Rng& rng) {
  if (n_subcarriers <= 0) throw std::invalid_argument("fus-net: n_subcarriers must be positive");
  FusNet m;
  m.n_subcarriers = n_subcarriers;
  const int n = n_subcarriers;
  m.net = nn::make_mlp({4 * n, 8 * n, 2 * n},
                       {nn::Activation::kRelu, nn::Activation::kLinear}, l2, rng);
  return m;
}

Eigen::VectorXd complex_to_real(const Eigen::VectorXcd& v) {
  Eigen::VectorXd out(2 * v.size());
  out.head(v.size()) = v.real();
  out.tail(v.size()) = v.imag();
  return out;
}

Eigen::VectorXcd real_to_complex(const Eigen::VectorXd& v) {
  if (v.size() % 2 != 0)
    throw std::invalid_argument("real_to_complex: length must be even");
  const Eigen::Index n = v.size() / 2;
  Eigen::VectorXcd out(n);
  out.real() = v.head(n);
  out.imag() = v.tail(n);
  return out;
}

Eigen::VectorXd splice_fus_input(const Eigen::VectorXcd& s_coarse,
                                 const Eigen::VectorXcd& y) {
  if (s_coarse.size() != y.size())
    throw std::invalid_argument("splice_fus_input: length mismatch");
  Eigen::VectorXd out(4 * y.size());
  out.head(2 * y.size()) = complex_to_real(s_coarse);
  out.tail(2 * y.size()) = complex_to_real(y);
  return out;
}

Eigen::VectorXcd ce_net_infer(const CeNet& model, const Eigen::VectorXcd& h_ls) {
  if (h_ls.size() != model.n_subcarriers)
    throw std::invalid_argument("ce_net_infer: input length != n_subcarriers");
  const Eigen::VectorXd in = complex_to_real(h_ls);
  return real_to_complex(nn::infer_row(model.net, in.transpose()).transpose());
}

Eigen::VectorXcd fus_net_infer(const FusNet& model, const Eigen::VectorXd& s_in) {
  if (s_in.size() != 4 * model.n_subcarriers)
    throw std::invalid_argument("fus_net_infer: input length != 4*n_subcarriers");
  return real_to_complex(nn::infer_row(model.net, s_in.transpose()).transpose());
}

ComplexityCount count_params_flops(const CeNet& ce, const FusNet& fus) {
  if (ce.n_subcarriers != fus.n_subcarriers)
    throw std::invalid_argument("count_params_flops: nets built for different N");
  ComplexityCount c;
  auto tally = [&](const nn::Mlp& net) {
    for (const auto& l : net.layers) {
      const std::int64_t in = l.weights.rows(), out = l.weights.cols();
      c.weights_ex_bias += in * out;
      c.weights += in * out + out;
      c.flops += 2 * in * out;
    }
    c.flops += 4 * net.bn.gamma.size();  // scale+shift on the normalized input
  };
  tally(ce.net);
  tally(fus.net);

  const std::int64_t n = ce.n_subcarriers;
  c.reported_weights = 28 * n * n + 8 * n;
  c.reported_flops = 56 * n * n - 8 * n;
  c.reported_total = 84 * n * n;
  return c;
}

void save(const CeNet& model, const std::string& path) {
  check_ce_shape(model.net, model.n_subcarriers);
  nn::save_checkpoint(model.net, "ce-net", model.n_subcarriers, path);
}

void save(const FusNet& model, const std::string& path) {
  check_fus_shape(model.net, model.n_subcarriers);
  nn::save_checkpoint(model.net, "fus-net", model.n_subcarriers, path);
}

CeNet load_ce(const std::string& path) {
  nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.arch_tag != "ce-net")
    throw std::runtime_error("load_ce: " + path + " holds arch '" + ck.arch_tag + "'");
  check_ce_shape(ck.net, ck.n_subcarriers);
  CeNet m;
  m.net = std::move(ck.net);
  m.n_subcarriers = ck.n_subcarriers;
  m.trained = true;
  return m;
}

FusNet load_fus(const std::string& path) {
  nn::Checkpoint ck = nn::load_checkpoint(path);
  if (ck.arch_tag != "fus-net")
    throw std::runtime_error("load_fus: " + path + " holds arch '" + ck.arch_tag + "'");
  check_fus_shape(ck.net, ck.n_subcarriers);
  FusNet m;
  m.net = std::move(ck.net);
  m.n_subcarriers = ck.n_subcarriers;
  m.trained = true;
  return m;
}

}  // namespace rspnet::models
