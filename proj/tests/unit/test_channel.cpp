#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "rspnet/channel.hpp"

using namespace rspnet;
using namespace rspnet::channel;

namespace {

// independent inverse DFT to recover taps from a CFR
Eigen::VectorXcd idft_taps(const Eigen::VectorXcd& cfr, int n_taps) {
  const int n = static_cast<int>(cfr.size());
  Eigen::VectorXcd taps(n_taps);
  for (int l = 0; l < n_taps; ++l) {
    std::complex<double> acc = 0.0;
    for (int k = 0; k < n; ++k)
      acc += cfr[k] * std::polar(1.0, 2.0 * std::numbers::pi * k * l / n);
    taps[l] = acc / static_cast<double>(n);
  }
  return taps;
}

}  // namespace

TEST_CASE("config validation rejects broken parameter sets") {
  ChannelConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  ChannelConfig bad = cfg;
  bad.n_taps = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.n_taps = 17;  // exceeds cp_length = 16
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.pdp_decay = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.n_subcarriers = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("tap powers follow the normalized exponential profile") {
  // frozen oracle: exp(-0.5 l), l = 0..4, normalized to sum 1
  const double expected[5] = {0.42865552877716695, 0.2599927206586828, 0.1576935563815933,
                              0.09564597678455912, 0.058012217397997876};
  ChannelConfig cfg;  // decay 0.5, L = 5
  Rng rng(1);
  const int draws = 10000;
  Eigen::VectorXd power = Eigen::VectorXd::Zero(5);
  for (int i = 0; i < draws; ++i) {
    const auto taps = idft_taps(draw_tap_channel(cfg, false, rng), 5);
    for (int l = 0; l < 5; ++l) power[l] += std::norm(taps[l]);
  }
  power /= draws;
  CHECK(std::abs(power.sum() - 1.0) < 0.05);
  for (int l = 0; l < 5; ++l)
    CHECK(std::abs(power[l] - expected[l]) < 0.05 * expected[l] + 0.005);
}

TEST_CASE("taps beyond L are empty and the CFR is the tap DFT") {
  ChannelConfig cfg;
  Rng rng(2);
  const auto cfr = draw_tap_channel(cfg, false, rng);
  const auto tail = idft_taps(cfr, cfg.n_subcarriers);
  for (int l = cfg.n_taps; l < cfg.n_subcarriers; ++l)
    CHECK(std::abs(tail[l]) < 1e-9);  // zero-padded delay domain
}

TEST_CASE("rician tap 0 carries the deterministic line-of-sight mean") {
  ChannelConfig cfg;
  cfg.rician_k_db = 3.0;
  Rng rng(3);
  const int draws = 20000;
  std::complex<double> mean_tap0 = 0.0;
  double p0 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto taps = idft_taps(draw_tap_channel(cfg, true, rng), 1);
    mean_tap0 += taps[0];
    p0 += std::norm(taps[0]);
  }
  mean_tap0 /= static_cast<double>(draws);
  p0 /= draws;
  const double k = std::pow(10.0, 0.3);
  const double expected_mean = std::sqrt(0.42865552877716695 * k / (k + 1.0));
  CHECK(std::abs(mean_tap0.real() - expected_mean) < 0.01);
  CHECK(std::abs(mean_tap0.imag()) < 0.01);          // LOS phase pinned to zero
  CHECK(std::abs(p0 - 0.42865552877716695) < 0.02);  // total tap power unchanged
  // rayleigh draw has zero mean
  Rng rng2(4);
  std::complex<double> mean_ray = 0.0;
  for (int i = 0; i < draws; ++i) mean_ray += idft_taps(draw_tap_channel(cfg, false, rng2), 1)[0];
  CHECK(std::abs(mean_ray) / draws < 0.01);
}

TEST_CASE("phase shift modes") {
  Rng rng(5);
  const auto ones = make_phase_shifts(6, PhaseMode::kAllZeroPhase, rng);
  for (int g = 0; g < 6; ++g) CHECK(ones[g] == std::complex<double>(1.0, 0.0));
  const auto rand_phi = make_phase_shifts(1000, PhaseMode::kUniformRandom, rng);
  std::complex<double> mean = rand_phi.mean();
  for (Eigen::Index g = 0; g < rand_phi.size(); ++g)
    CHECK(std::abs(std::abs(rand_phi[g]) - 1.0) < 1e-12);
  CHECK(std::abs(mean) < 0.08);  // phases cover the circle
  CHECK(make_phase_shifts(0, PhaseMode::kUniformRandom, rng).size() == 0);
}

TEST_CASE("compose_channel matches a scalar triple-loop evaluation") {
  Rng rng(6);
  ChannelConfig cfg;
  cfg.n_subsurfaces = 3;
  const auto direct = draw_tap_channel(cfg, false, rng);
  std::vector<Eigen::VectorXcd> tx(3), rx(3);
  for (int g = 0; g < 3; ++g) {
    tx[g] = draw_tap_channel(cfg, true, rng);
    rx[g] = draw_tap_channel(cfg, true, rng);
  }
  const auto phi = make_phase_shifts(3, PhaseMode::kUniformRandom, rng);

  const auto real = compose_channel(direct, tx, rx, phi);
  for (int k = 0; k < cfg.n_subcarriers; ++k) {
    std::complex<double> expected = direct[k];
    for (int g = 0; g < 3; ++g) expected += phi[g] * tx[g][k] * rx[g][k];
    CHECK(std::abs(real.h_composite[k] - expected) < 1e-12);
  }
}

TEST_CASE("compose_channel validates its inputs") {
  Rng rng(7);
  ChannelConfig cfg;
  const auto direct = draw_tap_channel(cfg, false, rng);
  std::vector<Eigen::VectorXcd> one = {draw_tap_channel(cfg, true, rng)};
  Eigen::VectorXcd phi(1);
  phi[0] = 2.0;  // not unit modulus
  CHECK_THROWS_AS(compose_channel(direct, one, one, phi), std::invalid_argument);
  phi[0] = 1.0;
  std::vector<Eigen::VectorXcd> two = {one[0], one[0]};
  CHECK_THROWS_AS(compose_channel(direct, two, one, phi), std::invalid_argument);
}

TEST_CASE("zero sub-surfaces reduce the composite to the direct link") {
  ChannelConfig cfg;
  cfg.n_subsurfaces = 0;
  Rng rng(8);
  const auto real = draw_channel(cfg, PhaseMode::kUniformRandom, rng);
  CHECK((real.h_composite - real.h_direct).norm() == 0.0);
  CHECK(real.phase_shifts.size() == 0);
}

TEST_CASE("composite channel power approaches 1 + G under random phases") {
  ChannelConfig cfg;  // G = 12, per-link power 1 on every segment product
  Rng rng(9);
  const int draws = 4000;
  double p = 0.0;
  for (int i = 0; i < draws; ++i)
    p += draw_channel(cfg, PhaseMode::kUniformRandom, rng).h_composite.squaredNorm() /
         cfg.n_subcarriers;
  p /= draws;
  CHECK(p == doctest::Approx(1.0 + cfg.n_subsurfaces).epsilon(0.10));
}

TEST_CASE("channel draws are reproducible from the stream id") {
  ChannelConfig cfg;
  Rng a = Rng::derive(33, 1), b = Rng::derive(33, 1);
  const auto ra = draw_channel(cfg, PhaseMode::kUniformRandom, a);
  const auto rb = draw_channel(cfg, PhaseMode::kUniformRandom, b);
  CHECK((ra.h_composite - rb.h_composite).norm() == 0.0);
}
