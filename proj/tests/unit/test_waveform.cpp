#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "rspnet/waveform.hpp"

using namespace rspnet;
using namespace rspnet::waveform;

TEST_CASE("power split partitions the total exactly") {
  PowerSplit s;  // lambda 0.15, P 1
  CHECK(s.pilot_power() == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(s.pilot_power() + s.data_power() == 1.0);  // exact by construction
  s.lambda = 0.3;
  s.total_power = 2.5;
  CHECK(s.pilot_power() + s.data_power() == 2.5);
  s.lambda = 1.1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.lambda = 0.5;
  s.total_power = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("zadoff-chu matches frozen reference values") {
  const auto z32 = zadoff_chu(32, 1);
  CHECK(z32[0] == std::complex<double>(1.0, 0.0));
  CHECK(z32[1].real() == doctest::Approx(0.9951847266721969).epsilon(1e-12));
  CHECK(z32[1].imag() == doctest::Approx(-0.0980171403295606).epsilon(1e-12));
  CHECK(z32[5].real() == doctest::Approx(-0.773010453362737).epsilon(1e-12));
  CHECK(z32[5].imag() == doctest::Approx(-0.6343932841636455).epsilon(1e-12));
  const auto z63 = zadoff_chu(63, 1);
  CHECK(z63[1].real() == doctest::Approx(0.9950307753654014).epsilon(1e-12));
  CHECK(z63[1].imag() == doctest::Approx(-0.09956784659581666).epsilon(1e-12));
}

TEST_CASE("zadoff-chu is unit modulus with ideal periodic autocorrelation") {
  for (int n : {32, 63, 64}) {
    const auto z = zadoff_chu(n, 1);
    for (int i = 0; i < n; ++i) CHECK(std::abs(std::abs(z[i]) - 1.0) < 1e-12);
    for (int shift = 1; shift < n; ++shift) {
      std::complex<double> acc = 0.0;
      for (int i = 0; i < n; ++i) acc += z[i] * std::conj(z[(i + shift) % n]);
      CHECK(std::abs(acc) < 1e-9 * n);
    }
  }
  CHECK_THROWS_AS(zadoff_chu(32, 0), std::invalid_argument);
  CHECK_THROWS_AS(zadoff_chu(32, 32), std::invalid_argument);
  CHECK_THROWS_AS(zadoff_chu(0, 1), std::invalid_argument);
}

TEST_CASE("zadoff-chu phases stay exact for large indices") {
  // the integer reduction keeps phases on the unit circle even where
  // r*n^2 overflows naive double precision
  const int n = 16384;
  const auto z = zadoff_chu(n, 7);
  for (int i : {n - 1, n - 2, n / 2 + 1}) CHECK(std::abs(std::abs(z[i]) - 1.0) < 1e-12);
}

TEST_CASE("qpsk gray mapping hits all four constellation points") {
  const double a = 1.0 / std::numbers::sqrt2;
  const auto sym = qpsk_modulate({0, 0, 0, 1, 1, 0, 1, 1});
  CHECK(sym[0] == std::complex<double>(a, a));
  CHECK(sym[1] == std::complex<double>(a, -a));
  CHECK(sym[2] == std::complex<double>(-a, a));
  CHECK(sym[3] == std::complex<double>(-a, -a));
  CHECK_THROWS_AS(qpsk_modulate({0, 1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(qpsk_modulate({0, 2}), std::invalid_argument);
}

TEST_CASE("qpsk demodulation is the exact inverse and ties resolve to 0") {
  Rng rng(21);
  const auto bits = random_bits(4096, rng);
  CHECK(qpsk_demodulate(qpsk_modulate(bits)) == bits);
  Eigen::VectorXcd zero(1);
  zero[0] = 0.0;
  CHECK(qpsk_demodulate(zero) == std::vector<std::uint8_t>{0, 0});
}

TEST_CASE("snr to noise variance") {
  CHECK(snr_to_noise_var(0.0, 1.0) == doctest::Approx(1.0));
  CHECK(snr_to_noise_var(10.0, 1.0) == doctest::Approx(0.1));
  CHECK(snr_to_noise_var(10.0, 2.0) == doctest::Approx(0.2));
  CHECK(snr_to_noise_var(-10.0, 1.0) == doctest::Approx(10.0));
  CHECK_THROWS_AS(snr_to_noise_var(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("noiseless transmit with lambda 0 is a pure data frame") {
  const int n = 8;
  Rng rng(22);
  Eigen::VectorXcd h(n), x_d(n);
  for (int k = 0; k < n; ++k) {
    h[k] = rng.complex_normal();
    x_d[k] = rng.complex_normal();
  }
  PowerSplit split;
  split.lambda = 0.0;
  const auto pilot = zadoff_chu(n, 1);
  const auto f = transmit(pilot, x_d, split, h, 0.0, rng);
  CHECK((f.received - x_d.cwiseProduct(h)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("noiseless transmit with lambda 1 is a pure pilot frame") {
  const int n = 8;
  Rng rng(23);
  Eigen::VectorXcd h(n);
  for (int k = 0; k < n; ++k) h[k] = rng.complex_normal();
  PowerSplit split;
  split.lambda = 1.0;
  split.total_power = 4.0;
  const auto pilot = zadoff_chu(n, 1);
  const auto f = transmit(pilot, Eigen::VectorXcd::Zero(n), split, h, 0.0, rng);
  CHECK((f.received - 2.0 * pilot.cwiseProduct(h)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("transmit validates shapes and noise variance") {
  Rng rng(24);
  PowerSplit split;
  const auto pilot = zadoff_chu(8, 1);
  CHECK_THROWS_AS(
      transmit(pilot, Eigen::VectorXcd::Zero(7), split, Eigen::VectorXcd::Ones(8), 0.0, rng),
      std::invalid_argument);
  CHECK_THROWS_AS(
      transmit(pilot, Eigen::VectorXcd::Zero(8), split, Eigen::VectorXcd::Ones(8), -1.0, rng),
      std::invalid_argument);
}

TEST_CASE("noise power lands on the configured variance") {
  const int n = 32;
  Rng rng(25);
  PowerSplit split;
  const auto pilot = zadoff_chu(n, 1);
  const Eigen::VectorXcd h = Eigen::VectorXcd::Ones(n);
  const double noise_var = 0.25;
  double acc = 0.0;
  const int frames = 4000;
  for (int i = 0; i < frames; ++i) {
    const auto f = random_frame(pilot, split, h, noise_var, rng);
    const Eigen::VectorXcd clean =
        (std::sqrt(split.pilot_power()) * pilot +
         std::sqrt(split.data_power()) * f.data_symbols)
            .cwiseProduct(h);
    acc += (f.received - clean).squaredNorm() / n;
  }
  CHECK(acc / frames == doctest::Approx(noise_var).epsilon(0.02));
}

TEST_CASE("random_frame carries its bits") {
  Rng rng(26);
  PowerSplit split;
  const auto pilot = zadoff_chu(16, 1);
  const auto f = random_frame(pilot, split, Eigen::VectorXcd::Ones(16), 0.0, rng);
  REQUIRE(f.data_bits.size() == 32);
  CHECK(qpsk_modulate(f.data_bits) == f.data_symbols);
}
