#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rspnet/channel.hpp"
#include "rspnet/waveform.hpp"

namespace rspnet::estimators {

/// Subcarriers with |h_est| below this are treated as erasures by the
/// zero-forcing equalizer instead of dividing by a near-zero.
inline constexpr double kZfEpsilon = 1e-8;

struct ZfResult {
  Eigen::VectorXcd s_zf;
  std::vector<int> erased;  ///< subcarrier indices forced to zero
};

/// Per-subcarrier least squares. With normalize_power (default) returns
/// y ./ (sqrt(lambda*P) * x_p), an unbiased estimate of the channel under
/// data-as-interference; otherwise returns y ./ x_p, which targets
/// sqrt(lambda*P) * h. Pilot entries must be bounded away from zero.
Eigen::VectorXcd ls_estimate(const Eigen::VectorXcd& y, const Eigen::VectorXcd& x_p,
                             const waveform::PowerSplit& split,
                             bool normalize_power = true);

/// Linear MMSE filter matrix W such that h_mmse = W * h_ls, built from the
/// channel covariance and the effective per-subcarrier interference level
/// C = (noise_var + data_power * mean channel power) / pilot_power.
Eigen::MatrixXcd lmmse_weights(const Eigen::MatrixXcd& channel_cov,
                               const waveform::PowerSplit& split, double noise_var);

/// LMMSE channel estimate: cov * (cov + C*I)^-1 * h_ls with h_ls the
/// power-normalized least-squares estimate of y.
Eigen::VectorXcd lmmse_estimate(const Eigen::VectorXcd& y, const Eigen::VectorXcd& x_p,
                                const waveform::PowerSplit& split,
                                const Eigen::MatrixXcd& channel_cov, double noise_var);

/// Zero-forcing equalizer y ./ h_est with erasure bookkeeping.
ZfResult zf_equalize(const Eigen::VectorXcd& y, const Eigen::VectorXcd& h_est);

/// Removes the superimposed pilot from an equalized frame and rescales:
/// (s - sqrt(lambda*P) * x_p) / sqrt((1-lambda)*P).
Eigen::VectorXcd cancel_pilot(const Eigen::VectorXcd& s_equalized,
                              const Eigen::VectorXcd& x_p,
                              const waveform::PowerSplit& split);

/// Per-subcarrier Wiener combining conj(h)*y / (|h|^2 + noise_var/P);
/// estimates the full superimposed symbol before pilot removal.
Eigen::VectorXcd wiener_equalize(const Eigen::VectorXcd& y, const Eigen::VectorXcd& h_est,
                                 const waveform::PowerSplit& split, double noise_var);

/// MMSE symbol detection: wiener_equalize then cancel_pilot.
Eigen::VectorXcd mmse_detect(const Eigen::VectorXcd& y, const Eigen::VectorXcd& h_est,
                             const Eigen::VectorXcd& x_p,
                             const waveform::PowerSplit& split, double noise_var);

/// Sample second-moment matrix (1/n) * sum h h^H over freshly drawn
/// composite channels. The composite channel is zero mean under random
/// phase shifts, so this is the covariance the LMMSE filter needs.
Eigen::MatrixXcd estimate_channel_covariance(const channel::ChannelConfig& cfg,
                                             channel::PhaseMode mode, int n_draws,
                                             Rng& rng);

}  // namespace rspnet::estimators
