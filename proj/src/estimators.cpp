#include "rspnet/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace rspnet::estimators {

namespace {

void check_same_length(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                       const char* who) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(who) + ": length mismatch");
}

}  // namespace

Eigen::VectorXcd ls_estimate(const Eigen::VectorXcd& y, const Eigen::VectorXcd& x_p,
                             const waveform::PowerSplit& split, bool normalize_power) {
  check_same_length(y, x_p, "ls_estimate");
  split.validate();
  const double scale = normalize_power ? std::sqrt(split.pilot_power()) : 1.0;
  if (!(scale > 0.0)) throw std::invalid_argument("ls_estimate: pilot power must be positive");
  Eigen::VectorXcd h(y.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    if (std::abs(x_p[k]) < 1e-12)
      throw std::invalid_argument("ls_estimate: pilot entry too close to zero");
    h[k] = y[k] / (scale * x_p[k]);
  }
  return h;
}

Eigen::MatrixXcd lmmse_weights(const Eigen::MatrixXcd& channel_cov,
                               const waveform::PowerSplit& split, double noise_var) {
  if (channel_cov.rows() != channel_cov.cols())
    throw std::invalid_argument("lmmse_weights: covariance must be square");
  split.validate();
  if (!(split.pilot_power() > 0.0))
    throw std::invalid_argument("lmmse_weights: pilot power must be positive");
  if (noise_var < 0.0) throw std::invalid_argument("lmmse_weights: noise_var must be >= 0");

  const Eigen::Index n = channel_cov.rows();
  // data symbols act as extra white noise on the pilot observation
  const double mean_power = channel_cov.diagonal().real().mean();
  const double sigma_eff = noise_var + split.data_power() * mean_power;
  const double c = sigma_eff / split.pilot_power();

  Eigen::MatrixXcd a = channel_cov;
  a.diagonal().array() += c;
  // want cov * (cov + c*I)^-1; the solve yields its conjugate transpose
  return a.llt().solve(channel_cov).adjoint();
}

Eigen::VectorXcd lmmse_estimate(const Eigen::VectorXcd& y, const Eigen::VectorXcd& x_p,
                                const waveform::PowerSplit& split,
                                const Eigen::MatrixXcd& channel_cov, double noise_var) {
  if (channel_cov.rows() != y.size())
    throw std::invalid_argument("lmmse_estimate: covariance size mismatch");
  const Eigen::VectorXcd h_ls = ls_estimate(y, x_p, split, true);
  return lmmse_weights(channel_cov, split, noise_var) * h_ls;
}

ZfResult zf_equalize(const Eigen::VectorXcd& y, const Eigen::VectorXcd& h_est) {
  check_same_length(y, h_est, "zf_equalize");
  ZfResult r;
  r.s_zf.resize(y.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    if (std::abs(h_est[k]) < kZfEpsilon) {
      r.s_zf[k] = 0.0;
      r.erased.push_back(static_cast<int>(k));
    } else {
      r.s_zf[k] = y[k] / h_est[k];
    }
  }
  return r;
}

Eigen::VectorXcd cancel_pilot(const Eigen::VectorXcd& s_equalized,
                              const Eigen::VectorXcd& x_p,
                              const waveform::PowerSplit& split) {
  check_same_length(s_equalized, x_p, "cancel_pilot");
  split.validate();
  const double a_d = std::sqrt(split.data_power());
  if (!(a_d > 0.0)) throw std::invalid_argument("cancel_pilot: data power must be positive");
  return (s_equalized - std::sqrt(split.pilot_power()) * x_p) / a_d;
}

Eigen::VectorXcd wiener_equalize(const Eigen::VectorXcd& y, const Eigen::VectorXcd& h_est,
                                 const waveform::PowerSplit& split, double noise_var) {
  check_same_length(y, h_est, "wiener_equalize");
  split.validate();
  if (noise_var < 0.0) throw std::invalid_argument("wiener_equalize: noise_var must be >= 0");
  const double reg = noise_var / split.total_power;
  Eigen::VectorXcd s(y.size());
  for (Eigen::Index k = 0; k < y.size(); ++k)
    s[k] = std::conj(h_est[k]) * y[k] / (std::norm(h_est[k]) + reg);
  return s;
}

Eigen::VectorXcd mmse_detect(const Eigen::VectorXcd& y, const Eigen::VectorXcd& h_est,
                             const Eigen::VectorXcd& x_p,
                             const waveform::PowerSplit& split, double noise_var) {
  return cancel_pilot(wiener_equalize(y, h_est, split, noise_var), x_p, split);
}

Eigen::MatrixXcd estimate_channel_covariance(const channel::ChannelConfig& cfg,
                                             channel::PhaseMode mode, int n_draws,
                                             Rng& rng) {
  cfg.validate();
  if (n_draws <= 0)
    throw std::invalid_argument("estimate_channel_covariance: n_draws must be positive");
  const Eigen::Index n = cfg.n_subcarriers;
  Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n_draws; ++i) {
    const Eigen::VectorXcd h = draw_channel(cfg, mode, rng).h_composite;
    cov.selfadjointView<Eigen::Lower>().rankUpdate(h, 1.0);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  return cov / static_cast<double>(n_draws);
}

}  // namespace rspnet::estimators
