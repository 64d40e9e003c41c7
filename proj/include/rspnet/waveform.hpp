#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rspnet/rng.hpp"

namespace rspnet::waveform {

/// Power split between the superimposed pilot and data parts of a frame.
/// pilot + data always reconstructs the total exactly.
struct PowerSplit {
  double lambda = 0.15;      ///< pilot fraction, in [0, 1]
  double total_power = 1.0;  ///< P

  double pilot_power() const { return lambda * total_power; }
  double data_power() const { return total_power - pilot_power(); }
  void validate() const;
};

/// One OFDM frame in the frequency domain. Pilot and data symbols occupy
/// every subcarrier simultaneously; `received` is what the receiver sees.
struct Frame {
  Eigen::VectorXcd pilot;
  Eigen::VectorXcd data_symbols;
  std::vector<std::uint8_t> data_bits;  ///< empty when symbols were supplied directly
  Eigen::VectorXcd received;
  double noise_var = 0.0;
  PowerSplit split;
};

/// Zadoff-Chu sequence of length n with the given root. Unit modulus with
/// ideal periodic autocorrelation when gcd(root, n) == 1. Phases are
/// reduced in exact integer arithmetic before the complex exponential.
Eigen::VectorXcd zadoff_chu(int n, int root);

/// Gray-mapped QPSK, unit symbol energy: bit pair (b0, b1) ->
/// ((1-2*b0) + j(1-2*b1)) / sqrt(2). bits.size() must be even.
Eigen::VectorXcd qpsk_modulate(const std::vector<std::uint8_t>& bits);

/// Sign-based hard decisions, inverse of qpsk_modulate on clean symbols.
/// Zero components decide bit 0.
std::vector<std::uint8_t> qpsk_demodulate(const Eigen::VectorXcd& symbols);

std::vector<std::uint8_t> random_bits(int count, Rng& rng);

/// Per-subcarrier noise variance for a given SNR = 10*log10(P / sigma^2).
double snr_to_noise_var(double snr_db, double total_power);

/// y = (sqrt(lambda*P)*x_p + sqrt((1-lambda)*P)*x_d) .* h + w,
/// w ~ CN(0, noise_var) i.i.d. per subcarrier.
Frame transmit(const Eigen::VectorXcd& pilot, const Eigen::VectorXcd& data_symbols,
               const PowerSplit& split, const Eigen::VectorXcd& channel_cfr,
               double noise_var, Rng& rng);

/// Draws 2N random bits, QPSK-modulates them and transmits. The returned
/// frame keeps the bits for BER accounting.
Frame random_frame(const Eigen::VectorXcd& pilot, const PowerSplit& split,
                   const Eigen::VectorXcd& channel_cfr, double noise_var, Rng& rng);

}  // namespace rspnet::waveform
