#include "rspnet/waveform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rspnet::waveform {

void PowerSplit::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("power split: lambda must be in [0, 1]");
  if (!(total_power > 0.0) || !std::isfinite(total_power))
    throw std::invalid_argument("power split: total_power must be positive and finite");
}

Eigen::VectorXcd zadoff_chu(int n, int root) {
  if (n <= 0) throw std::invalid_argument("zadoff_chu: length must be positive");
  if (root <= 0 || root >= n)
    throw std::invalid_argument("zadoff_chu: root must be in (0, n)");

  // phase = -pi * r * n(n+even?) / N; exp(-j*pi*m/N) is 2N-periodic in m,
  // so reduce m modulo 2N in integers to keep phases exact for large n
  const std::int64_t two_n = 2LL * n;
  Eigen::VectorXcd seq(n);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t quad = (n % 2 == 0) ? (i * i) % two_n : (i * (i + 1)) % two_n;
    const std::int64_t m = (static_cast<std::int64_t>(root) * quad) % two_n;
    seq[i] = std::polar(1.0, -std::numbers::pi * static_cast<double>(m) / n);
  }
  return seq;
}

Eigen::VectorXcd qpsk_modulate(const std::vector<std::uint8_t>& bits) {
  if (bits.size() % 2 != 0)
    throw std::invalid_argument("qpsk_modulate: bit count must be even");
  for (std::uint8_t b : bits)
    if (b > 1) throw std::invalid_argument("qpsk_modulate: bits must be 0 or 1");

  const double scale = 1.0 / std::numbers::sqrt2;
  Eigen::VectorXcd sym(static_cast<Eigen::Index>(bits.size() / 2));
  for (Eigen::Index i = 0; i < sym.size(); ++i) {
    const double re = bits[2 * i] ? -1.0 : 1.0;
    const double im = bits[2 * i + 1] ? -1.0 : 1.0;
    sym[i] = std::complex<double>(re * scale, im * scale);
  }
  return sym;
}

std::vector<std::uint8_t> qpsk_demodulate(const Eigen::VectorXcd& symbols) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(2 * symbols.size()));
  for (Eigen::Index i = 0; i < symbols.size(); ++i) {
    bits[2 * i] = symbols[i].real() < 0.0 ? 1 : 0;
    bits[2 * i + 1] = symbols[i].imag() < 0.0 ? 1 : 0;
  }
  return bits;
}

std::vector<std::uint8_t> random_bits(int count, Rng& rng) {
  if (count < 0) throw std::invalid_argument("random_bits: count must be >= 0");
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(count));
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng.next_u64() & 1ULL);
  return bits;
}

double snr_to_noise_var(double snr_db, double total_power) {
  if (!(total_power > 0.0))
    throw std::invalid_argument("snr_to_noise_var: total_power must be positive");
  return total_power / std::pow(10.0, snr_db / 10.0);
}

Frame transmit(const Eigen::VectorXcd& pilot, const Eigen::VectorXcd& data_symbols,
               const PowerSplit& split, const Eigen::VectorXcd& channel_cfr,
               double noise_var, Rng& rng) {
  split.validate();
  const Eigen::Index n = channel_cfr.size();
  if (pilot.size() != n || data_symbols.size() != n)
    throw std::invalid_argument("transmit: pilot/data/channel lengths disagree");
  if (noise_var < 0.0 || !std::isfinite(noise_var))
    throw std::invalid_argument("transmit: noise_var must be >= 0 and finite");

  Frame f;
  f.pilot = pilot;
  f.data_symbols = data_symbols;
  f.noise_var = noise_var;
  f.split = split;

  const double a_p = std::sqrt(split.pilot_power());
  const double a_d = std::sqrt(split.data_power());
  f.received = (a_p * pilot + a_d * data_symbols).cwiseProduct(channel_cfr);
  if (noise_var > 0.0) {
    const double sigma = std::sqrt(noise_var);
    for (Eigen::Index k = 0; k < n; ++k) f.received[k] += sigma * rng.complex_normal();
  }
  return f;
}

Frame random_frame(const Eigen::VectorXcd& pilot, const PowerSplit& split,
                   const Eigen::VectorXcd& channel_cfr, double noise_var, Rng& rng) {
  auto bits = random_bits(static_cast<int>(2 * channel_cfr.size()), rng);
  Frame f = transmit(pilot, qpsk_modulate(bits), split, channel_cfr, noise_var, rng);
  f.data_bits = std::move(bits);
  return f;
}

}  // namespace rspnet::waveform
