#include "rspnet/mlp.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rspnet::nn {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }
bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

Eigen::MatrixXd apply_activation(const Eigen::MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return z.cwiseMax(0.0);
    case Activation::kLinear:
      return z;
  }
  throw std::logic_error("unknown activation");
}

std::string format_value(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_value failed");
  return std::string(buf, end);
}

}  // namespace

int Mlp::input_dim() const {
  return layers.empty() ? static_cast<int>(bn.gamma.size())
                        : static_cast<int>(layers.front().weights.rows());
}

int Mlp::output_dim() const {
  return layers.empty() ? input_dim() : static_cast<int>(layers.back().weights.cols());
}

std::int64_t Mlp::parameter_count() const {
  std::int64_t count = 4 * bn.gamma.size();
  for (const auto& l : layers) count += l.weights.size() + l.biases.size();
  return count;
}

void Mlp::validate() const {
  const Eigen::Index d0 = bn.gamma.size();
  if (bn.beta.size() != d0 || bn.running_mean.size() != d0 || bn.running_var.size() != d0)
    throw std::invalid_argument("mlp: batch-norm vector sizes disagree");
  if (!(bn.momentum >= 0.0 && bn.momentum < 1.0))
    throw std::invalid_argument("mlp: batch-norm momentum must be in [0, 1)");
  if (!(bn.epsilon > 0.0)) throw std::invalid_argument("mlp: batch-norm epsilon must be > 0");
  if ((bn.running_var.array() < 0.0).any())
    throw std::invalid_argument("mlp: running variance must be >= 0");
  if (layers.empty()) throw std::invalid_argument("mlp: at least one layer required");

  Eigen::Index dim = d0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.weights.rows() != dim)
      throw std::invalid_argument("mlp: layer " + std::to_string(i) + " input dim mismatch");
    if (l.biases.size() != l.weights.cols())
      throw std::invalid_argument("mlp: layer " + std::to_string(i) + " bias dim mismatch");
    if (!all_finite(l.weights) || !all_finite(l.biases))
      throw std::invalid_argument("mlp: layer " + std::to_string(i) + " has non-finite params");
    dim = l.weights.cols();
  }
  if (!all_finite(bn.gamma) || !all_finite(bn.beta) || !all_finite(bn.running_mean) ||
      !all_finite(bn.running_var))
    throw std::invalid_argument("mlp: batch norm has non-finite params");
  if (!(l2 >= 0.0) || !std::isfinite(l2))
    throw std::invalid_argument("mlp: l2 must be >= 0 and finite");
}

Mlp make_mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
             double l2, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least input and output dims");
  if (acts.size() != dims.size() - 1)
    throw std::invalid_argument("make_mlp: one activation per layer required");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("make_mlp: dims must be positive");

  Mlp net;
  net.l2 = l2;
  const int d0 = dims[0];
  net.bn.gamma = Eigen::VectorXd::Ones(d0);
  net.bn.beta = Eigen::VectorXd::Zero(d0);
  net.bn.running_mean = Eigen::VectorXd::Zero(d0);
  net.bn.running_var = Eigen::VectorXd::Ones(d0);

  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    DenseLayer l;
    const int fan_in = dims[i], fan_out = dims[i + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    l.weights.resize(fan_in, fan_out);
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c)
        l.weights(r, c) = rng.uniform(-bound, bound);
    l.biases = Eigen::VectorXd::Zero(fan_out);
    l.act = acts[i];
    net.layers.push_back(std::move(l));
  }
  net.validate();
  return net;
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& batch) {
  net.validate();
  if (batch.cols() != net.input_dim())
    throw std::invalid_argument("forward: batch width != input dim");
  if (!all_finite(batch)) throw std::invalid_argument("forward: non-finite input");

  const Eigen::ArrayXd inv_std = (net.bn.running_var.array() + net.bn.epsilon).sqrt().inverse();
  Eigen::MatrixXd a =
      ((batch.rowwise() - net.bn.running_mean.transpose()).array().rowwise() *
       (inv_std * net.bn.gamma.array()).transpose())
          .rowwise() +
      net.bn.beta.transpose().array();
  for (const auto& l : net.layers)
    a = apply_activation((a * l.weights).rowwise() + l.biases.transpose(), l.act);
  return a;
}

Eigen::RowVectorXd infer_row(const Mlp& net, const Eigen::RowVectorXd& input) {
  if (input.size() != net.input_dim())
    throw std::invalid_argument("infer_row: input width != input dim");
  if (!input.allFinite()) throw std::invalid_argument("infer_row: non-finite input");

  const Eigen::ArrayXd scale =
      net.bn.gamma.array() / (net.bn.running_var.array() + net.bn.epsilon).sqrt();
  Eigen::RowVectorXd a =
      ((input - net.bn.running_mean.transpose()).array() * scale.transpose()).matrix() +
      net.bn.beta.transpose();
  Eigen::RowVectorXd z;
  for (const auto& l : net.layers) {
    z.resize(l.weights.cols());
    z.noalias() = a * l.weights;
    z += l.biases.transpose();
    if (l.act == Activation::kRelu) z.array() = z.array().max(0.0);
    a.swap(z);
  }
  return a;
}

Eigen::MatrixXd forward(Mlp& net, const Eigen::MatrixXd& batch, ForwardCache& cache) {
  net.validate();
  if (batch.cols() != net.input_dim())
    throw std::invalid_argument("forward: batch width != input dim");
  if (batch.rows() < 2)
    throw std::invalid_argument("forward: training mode needs at least 2 samples");
  if (!all_finite(batch)) throw std::invalid_argument("forward: non-finite input");

  const Eigen::VectorXd mean = batch.colwise().mean();
  const Eigen::MatrixXd centered = batch.rowwise() - mean.transpose();
  const Eigen::VectorXd var = centered.array().square().colwise().mean();
  const Eigen::ArrayXd inv_std = (var.array() + net.bn.epsilon).sqrt().inverse();

  cache.x_hat = centered.array().rowwise() * inv_std.transpose();
  cache.activations.clear();
  cache.pre_activations.clear();
  cache.activations.reserve(net.layers.size() + 1);
  cache.pre_activations.reserve(net.layers.size());

  Eigen::MatrixXd a =
      (cache.x_hat.array().rowwise() * net.bn.gamma.transpose().array()).rowwise() +
      net.bn.beta.transpose().array();
  cache.activations.push_back(a);
  for (const auto& l : net.layers) {
    Eigen::MatrixXd z = (a * l.weights).rowwise() + l.biases.transpose();
    a = apply_activation(z, l.act);
    cache.pre_activations.push_back(std::move(z));
    cache.activations.push_back(a);
  }

  const double m = net.bn.momentum;
  net.bn.running_mean = m * net.bn.running_mean + (1.0 - m) * mean;
  net.bn.running_var = m * net.bn.running_var + (1.0 - m) * var;

  cache.valid = true;
  return a;
}

double loss_mse_l2(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& label,
                   const Mlp& net) {
  if (pred.rows() != label.rows() || pred.cols() != label.cols())
    throw std::invalid_argument("loss_mse_l2: pred/label shape mismatch");
  if (pred.rows() == 0) throw std::invalid_argument("loss_mse_l2: empty batch");
  double loss = (label - pred).squaredNorm() / static_cast<double>(pred.rows());
  for (const auto& l : net.layers) loss += net.l2 * l.weights.squaredNorm();
  return loss;
}

Gradients backward(const Mlp& net, const ForwardCache& cache, const Eigen::MatrixXd& label) {
  if (!cache.valid) throw std::invalid_argument("backward: cache not filled by a training pass");
  const std::size_t n_layers = net.layers.size();
  if (cache.activations.size() != n_layers + 1 || cache.pre_activations.size() != n_layers)
    throw std::invalid_argument("backward: cache does not match network");
  const Eigen::MatrixXd& pred = cache.activations.back();
  if (label.rows() != pred.rows() || label.cols() != pred.cols())
    throw std::invalid_argument("backward: label shape mismatch");

  const double inv_s = 1.0 / static_cast<double>(pred.rows());
  Gradients g;
  g.d_weights.resize(n_layers);
  g.d_biases.resize(n_layers);

  Eigen::MatrixXd delta = 2.0 * inv_s * (pred - label);  // dL/d a_last
  for (std::size_t i = n_layers; i-- > 0;) {
    const auto& l = net.layers[i];
    if (l.act == Activation::kRelu)
      delta = delta.array() * (cache.pre_activations[i].array() > 0.0).cast<double>();
    g.d_weights[i] = cache.activations[i].transpose() * delta + (2.0 * net.l2) * l.weights;
    g.d_biases[i] = delta.colwise().sum();
    delta = delta * l.weights.transpose();
  }
  // delta is now dL/d(bn output); nothing upstream of batch norm needs dx
  g.d_gamma = (delta.array() * cache.x_hat.array()).colwise().sum();
  g.d_beta = delta.colwise().sum();
  return g;
}

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  const std::size_t n_layers = net.layers.size();
  if (grads.d_weights.size() != n_layers || grads.d_biases.size() != n_layers)
    throw std::invalid_argument("adam_step: gradient layer count mismatch");
  for (std::size_t i = 0; i < n_layers; ++i) {
    if (grads.d_weights[i].rows() != net.layers[i].weights.rows() ||
        grads.d_weights[i].cols() != net.layers[i].weights.cols() ||
        grads.d_biases[i].size() != net.layers[i].biases.size())
      throw std::invalid_argument("adam_step: gradient shape mismatch at layer " +
                                  std::to_string(i));
    if (!all_finite(grads.d_weights[i]) || !all_finite(grads.d_biases[i]))
      throw std::runtime_error("adam_step: non-finite gradient, step rejected");
  }
  if (grads.d_gamma.size() != net.bn.gamma.size() || grads.d_beta.size() != net.bn.beta.size())
    throw std::invalid_argument("adam_step: batch-norm gradient shape mismatch");
  if (!all_finite(grads.d_gamma) || !all_finite(grads.d_beta))
    throw std::runtime_error("adam_step: non-finite gradient, step rejected");

  if (state.step_count == 0 && state.m_weights.empty()) {
    state.m_weights.resize(n_layers);
    state.v_weights.resize(n_layers);
    state.m_biases.resize(n_layers);
    state.v_biases.resize(n_layers);
    for (std::size_t i = 0; i < n_layers; ++i) {
      state.m_weights[i] = Eigen::MatrixXd::Zero(net.layers[i].weights.rows(),
                                                 net.layers[i].weights.cols());
      state.v_weights[i] = state.m_weights[i];
      state.m_biases[i] = Eigen::VectorXd::Zero(net.layers[i].biases.size());
      state.v_biases[i] = state.m_biases[i];
    }
    state.m_gamma = Eigen::VectorXd::Zero(net.bn.gamma.size());
    state.v_gamma = state.m_gamma;
    state.m_beta = state.m_gamma;
    state.v_beta = state.m_gamma;
  }
  if (state.m_weights.size() != n_layers)
    throw std::invalid_argument("adam_step: state belongs to a different network");

  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * grad;
    v = state.beta2 * v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
    param.array() -=
        state.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.epsilon);
  };
  for (std::size_t i = 0; i < n_layers; ++i) {
    update(net.layers[i].weights, grads.d_weights[i], state.m_weights[i], state.v_weights[i]);
    update(net.layers[i].biases, grads.d_biases[i], state.m_biases[i], state.v_biases[i]);
  }
  update(net.bn.gamma, grads.d_gamma, state.m_gamma, state.v_gamma);
  update(net.bn.beta, grads.d_beta, state.m_beta, state.v_beta);
  net.validate();
}

namespace {

// flat view over every learnable parameter, for grad_check
struct ParamRef {
  double* value;
  const double* grad;
  std::string name;
};

std::vector<ParamRef> enumerate_params(Mlp& net, const Gradients& g) {
  std::vector<ParamRef> refs;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    auto& w = net.layers[i].weights;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        refs.push_back({&w(r, c), &g.d_weights[i](r, c),
                        "W" + std::to_string(i) + "[" + std::to_string(r) + "," +
                            std::to_string(c) + "]"});
    auto& b = net.layers[i].biases;
    for (Eigen::Index r = 0; r < b.size(); ++r)
      refs.push_back({&b[r], &g.d_biases[i][r], "b" + std::to_string(i) + "[" + std::to_string(r) + "]"});
  }
  for (Eigen::Index r = 0; r < net.bn.gamma.size(); ++r)
    refs.push_back({&net.bn.gamma[r], &g.d_gamma[r], "gamma[" + std::to_string(r) + "]"});
  for (Eigen::Index r = 0; r < net.bn.beta.size(); ++r)
    refs.push_back({&net.bn.beta[r], &g.d_beta[r], "beta[" + std::to_string(r) + "]"});
  return refs;
}

}  // namespace

GradCheckResult grad_check(const Mlp& net, const Eigen::MatrixXd& batch,
                           const Eigen::MatrixXd& label, double step, double tolerance) {
  if (!(step > 0.0)) throw std::invalid_argument("grad_check: step must be positive");

  Mlp base = net;
  ForwardCache cache;
  const Eigen::MatrixXd pred = forward(base, batch, cache);
  const Gradients analytic = backward(base, cache, label);

  auto loss_at = [&](const Mlp& candidate) {
    Mlp scratch = candidate;  // training pass mutates running stats; keep candidate intact
    ForwardCache c;
    const Eigen::MatrixXd p = forward(scratch, batch, c);
    return loss_mse_l2(p, label, scratch);
  };

  Mlp probe = net;
  const std::vector<ParamRef> refs = enumerate_params(probe, analytic);

  GradCheckResult result;
  for (const auto& ref : refs) {
    const double saved = *ref.value;
    *ref.value = saved + step;
    const double up = loss_at(probe);
    *ref.value = saved - step;
    const double down = loss_at(probe);
    *ref.value = saved;

    const double fd = (up - down) / (2.0 * step);
    const double an = *ref.grad;
    const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-3});
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_param = ref.name;
    }
  }
  result.passed = result.max_rel_error < tolerance;
  return result;
}

void save_checkpoint(const Mlp& net, const std::string& arch_tag, int n_subcarriers,
                     const std::string& path) {
  net.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);

  out << "RSPNET v1\n";
  out << "arch " << arch_tag << "\n";
  out << "n " << n_subcarriers << "\n";
  out << "l2 " << format_value(net.l2) << "\n";
  out << "layers " << net.layers.size() << "\n";
  for (const auto& l : net.layers)
    out << "layer " << l.weights.rows() << " " << l.weights.cols() << " "
        << (l.act == Activation::kRelu ? "relu" : "linear") << "\n";
  out << "bn " << net.bn.gamma.size() << " " << format_value(net.bn.momentum) << " "
      << format_value(net.bn.epsilon) << "\n";

  auto dump_vec = [&](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out << format_value(v[i]) << "\n";
  };
  dump_vec(net.bn.running_mean);
  dump_vec(net.bn.running_var);
  dump_vec(net.bn.gamma);
  dump_vec(net.bn.beta);
  out << "params\n";
  for (const auto& l : net.layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c)
        out << format_value(l.weights(r, c)) << "\n";
    dump_vec(l.biases);
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

namespace {

class CheckpointReader {
 public:
  CheckpointReader(std::istream& in, const std::string& path) : in_(in), path_(path) {}

  std::string next_line() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return line;
    }
    fail("unexpected end of file");
  }

  double next_value() {
    const std::string line = next_line();
    double v = 0.0;
    const char* begin = line.data();
    const char* end = begin + line.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) fail("expected a number, got '" + line + "'");
    if (!std::isfinite(v)) fail("non-finite parameter value");
    return v;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::runtime_error("load_checkpoint: " + path_ + ":" + std::to_string(line_no_) +
                             ": " + msg);
  }

 private:
  std::istream& in_;
  std::string path_;
  int line_no_ = 0;
};

}  // namespace

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  CheckpointReader reader(in, path);

  if (reader.next_line() != "RSPNET v1") reader.fail("bad magic, expected 'RSPNET v1'");

  Checkpoint ck;
  std::istringstream fields;
  auto expect_key = [&](const std::string& key) {
    const std::string line = reader.next_line();
    if (line.rfind(key + " ", 0) != 0) reader.fail("expected '" + key + " ...'");
    fields.clear();
    fields.str(line.substr(key.size() + 1));
  };

  expect_key("arch");
  fields >> ck.arch_tag;
  expect_key("n");
  fields >> ck.n_subcarriers;
  if (fields.fail() || ck.n_subcarriers <= 0) reader.fail("bad subcarrier count");
  expect_key("l2");
  fields >> ck.net.l2;
  expect_key("layers");
  std::size_t n_layers = 0;
  fields >> n_layers;
  if (fields.fail() || n_layers == 0 || n_layers > 64) reader.fail("bad layer count");

  struct LayerSpec {
    Eigen::Index in, out;
    Activation act;
  };
  std::vector<LayerSpec> specs;
  for (std::size_t i = 0; i < n_layers; ++i) {
    expect_key("layer");
    LayerSpec s{};
    std::string act;
    fields >> s.in >> s.out >> act;
    if (fields.fail() || s.in <= 0 || s.out <= 0) reader.fail("bad layer dims");
    if (act == "relu")
      s.act = Activation::kRelu;
    else if (act == "linear")
      s.act = Activation::kLinear;
    else
      reader.fail("unknown activation '" + act + "'");
    specs.push_back(s);
  }

  expect_key("bn");
  Eigen::Index bn_dim = 0;
  fields >> bn_dim >> ck.net.bn.momentum >> ck.net.bn.epsilon;
  if (fields.fail() || bn_dim <= 0) reader.fail("bad batch-norm header");
  if (bn_dim != specs.front().in) reader.fail("batch-norm dim does not match first layer");

  auto read_vec = [&](Eigen::Index count) {
    Eigen::VectorXd v(count);
    for (Eigen::Index i = 0; i < count; ++i) v[i] = reader.next_value();
    return v;
  };
  ck.net.bn.running_mean = read_vec(bn_dim);
  ck.net.bn.running_var = read_vec(bn_dim);
  ck.net.bn.gamma = read_vec(bn_dim);
  ck.net.bn.beta = read_vec(bn_dim);

  if (reader.next_line() != "params") reader.fail("expected 'params'");
  for (const auto& s : specs) {
    DenseLayer l;
    l.act = s.act;
    l.weights.resize(s.in, s.out);
    for (Eigen::Index r = 0; r < s.in; ++r)
      for (Eigen::Index c = 0; c < s.out; ++c) l.weights(r, c) = reader.next_value();
    l.biases = read_vec(s.out);
    ck.net.layers.push_back(std::move(l));
  }

  std::string extra;
  while (std::getline(in, extra)) {
    if (!extra.empty() && extra.back() == '\r') extra.pop_back();
    if (!extra.empty()) reader.fail("trailing content after parameters");
  }

  ck.net.validate();
  return ck;
}

}  // namespace rspnet::nn
