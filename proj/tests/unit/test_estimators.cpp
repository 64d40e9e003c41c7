#include <doctest.h>

#include <cmath>

#include "rspnet/estimators.hpp"

using namespace rspnet;
using namespace rspnet::estimators;

namespace {

Eigen::VectorXcd random_cvec(int n, Rng& rng) {
  Eigen::VectorXcd v(n);
  for (auto& x : v) x = rng.complex_normal();
  return v;
}

}  // namespace

TEST_CASE("ls recovers the channel exactly on a pilot-only noiseless frame") {
  const int n = 16;
  Rng rng(31);
  const auto pilot = waveform::zadoff_chu(n, 1);
  const auto h = random_cvec(n, rng);
  waveform::PowerSplit split;
  const auto f = waveform::transmit(pilot, Eigen::VectorXcd::Zero(n), split, h, 0.0, rng);
  const auto h_ls = ls_estimate(f.received, pilot, split, true);
  CHECK((h_ls - h).cwiseAbs().maxCoeff() < 1e-12);
  // unnormalized convention targets sqrt(lambda P) h instead
  const auto h_raw = ls_estimate(f.received, pilot, split, false);
  CHECK((h_raw - std::sqrt(split.pilot_power()) * h).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ls on a superimposed frame shows the data interference term") {
  const int n = 16;
  Rng rng(32);
  const auto pilot = waveform::zadoff_chu(n, 1);
  const auto h = random_cvec(n, rng);
  waveform::PowerSplit split;
  const auto f = waveform::random_frame(pilot, split, h, 0.0, rng);
  const auto h_ls = ls_estimate(f.received, pilot, split, true);
  const double a_ratio = std::sqrt(split.data_power() / split.pilot_power());
  for (int k = 0; k < n; ++k) {
    const auto expected = h[k] * (1.0 + a_ratio * f.data_symbols[k] / pilot[k]);
    CHECK(std::abs(h_ls[k] - expected) < 1e-12);
  }
}

TEST_CASE("ls rejects pilots with near-zero entries") {
  waveform::PowerSplit split;
  Eigen::VectorXcd y = Eigen::VectorXcd::Ones(2), p = Eigen::VectorXcd::Ones(2);
  p[1] = 0.0;
  CHECK_THROWS_AS(ls_estimate(y, p, split, true), std::invalid_argument);
}

TEST_CASE("scalar lmmse matches the hand-computed shrinkage") {
  // N=1: cov = [c]; h_mmse = c/(c + C) * h_ls with
  // C = (noise + (1-lambda) P c) / (lambda P)
  waveform::PowerSplit split;  // lambda 0.15, P 1
  const double c = 13.0, noise_var = 0.5;
  Eigen::MatrixXcd cov(1, 1);
  cov(0, 0) = c;
  Eigen::VectorXcd y(1), x_p(1);
  x_p[0] = 1.0;
  y[0] = std::complex<double>(0.3, -0.7);
  const auto h = lmmse_estimate(y, x_p, split, cov, noise_var);
  const double cap_c = (noise_var + split.data_power() * c) / split.pilot_power();
  const auto h_ls = y[0] / std::sqrt(split.pilot_power());
  CHECK(std::abs(h[0] - h_ls * c / (c + cap_c)) < 1e-12);
}

TEST_CASE("lmmse filter agrees with the explicit inverse on a random covariance") {
  Rng rng(33);
  const int n = 6;
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) a(r, c) = rng.complex_normal();
  const Eigen::MatrixXcd cov =
      a * a.adjoint() / n + 0.5 * Eigen::MatrixXcd::Identity(n, n);
  waveform::PowerSplit split;
  const double noise_var = 0.1;
  const double cap_c =
      (noise_var + split.data_power() * cov.diagonal().real().mean()) / split.pilot_power();
  const Eigen::MatrixXcd direct =
      cov * (cov + cap_c * Eigen::MatrixXcd::Identity(n, n)).inverse();
  CHECK((lmmse_weights(cov, split, noise_var) - direct).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("lmmse collapses to zero as noise dominates and to identity as it vanishes") {
  Rng rng(34);
  const int n = 4;
  Eigen::MatrixXcd cov = Eigen::MatrixXcd::Identity(n, n) * 13.0;
  waveform::PowerSplit split;
  split.lambda = 1.0;  // pure pilot: no data interference left
  const auto w_hi = lmmse_weights(cov, split, 1e12);
  CHECK(w_hi.cwiseAbs().maxCoeff() < 1e-9);
  const auto w_lo = lmmse_weights(cov, split, 0.0);
  CHECK((w_lo - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero-forcing divides through and records erasures") {
  Eigen::VectorXcd y(3), h(3);
  y << std::complex<double>(1, 1), std::complex<double>(2, 0), std::complex<double>(0, 1);
  h << std::complex<double>(0.5, 0), std::complex<double>(0, 1e-12), std::complex<double>(0, 2);
  const auto r = zf_equalize(y, h);
  CHECK(r.erased == std::vector<int>{1});
  CHECK(std::abs(r.s_zf[1]) == 0.0);
  CHECK(std::abs(r.s_zf[0] - y[0] / h[0]) < 1e-15);
  CHECK(std::abs(r.s_zf[2] - y[2] / h[2]) < 1e-15);
}

TEST_CASE("pilot cancellation recovers the data part exactly") {
  const int n = 8;
  Rng rng(35);
  const auto pilot = waveform::zadoff_chu(n, 1);
  const auto x_d = random_cvec(n, rng);
  waveform::PowerSplit split;
  const Eigen::VectorXcd s = std::sqrt(split.pilot_power()) * pilot +
                             std::sqrt(split.data_power()) * x_d;
  CHECK((cancel_pilot(s, pilot, split) - x_d).cwiseAbs().maxCoeff() < 1e-14);
  waveform::PowerSplit all_pilot;
  all_pilot.lambda = 1.0;
  CHECK_THROWS_AS(cancel_pilot(s, pilot, all_pilot), std::invalid_argument);
}

TEST_CASE("wiener equalizer reduces to zero-forcing without noise") {
  const int n = 8;
  Rng rng(36);
  const auto y = random_cvec(n, rng);
  const auto h = random_cvec(n, rng);
  waveform::PowerSplit split;
  const auto s_w = wiener_equalize(y, h, split, 0.0);
  const auto s_zf = zf_equalize(y, h).s_zf;
  CHECK((s_w - s_zf).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("wiener equalizer shrinks low-quality subcarriers under noise") {
  Eigen::VectorXcd y(1), h(1);
  y[0] = 1.0;
  h[0] = 0.1;
  waveform::PowerSplit split;
  const auto s = wiener_equalize(y, h, split, 1.0);
  // conj(h) y / (|h|^2 + 1) = 0.1/1.01, far below the zf value 10
  CHECK(std::abs(s[0]) < 0.2);
  CHECK(std::abs(s[0] - std::complex<double>(0.1 / 1.01, 0.0)) < 1e-12);
}

TEST_CASE("mmse detection equals wiener equalization then pilot removal") {
  const int n = 8;
  Rng rng(37);
  const auto pilot = waveform::zadoff_chu(n, 1);
  const auto y = random_cvec(n, rng);
  const auto h = random_cvec(n, rng);
  waveform::PowerSplit split;
  const double noise_var = 0.3;
  const auto direct = mmse_detect(y, h, pilot, split, noise_var);
  const auto staged = cancel_pilot(wiener_equalize(y, h, split, noise_var), pilot, split);
  CHECK((direct - staged).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample covariance is hermitian positive semidefinite with the right scale") {
  channel::ChannelConfig cfg;
  Rng rng(38);
  const auto cov = estimate_channel_covariance(cfg, channel::PhaseMode::kUniformRandom,
                                               3000, rng);
  CHECK((cov - cov.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXd eig =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(cov).eigenvalues();
  CHECK(eig.minCoeff() > -1e-10);
  // diagonal carries the composite power 1 + G
  CHECK(cov.diagonal().real().mean() ==
        doctest::Approx(1.0 + cfg.n_subsurfaces).epsilon(0.15));
  CHECK(cov.diagonal().imag().cwiseAbs().maxCoeff() < 1e-12);
}
