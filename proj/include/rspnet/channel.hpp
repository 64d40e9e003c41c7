#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rspnet/rng.hpp"

namespace rspnet::channel {

/// Frequency-selective channel parameters for the reflecting-surface link.
/// Each of the G sub-surfaces applies one shared reflection coefficient to
/// its own tap channel pair (tx->surface, surface->rx); the direct tx->rx
/// link bypasses the surface.
struct ChannelConfig {
  int n_subcarriers = 32;    ///< N
  int n_subsurfaces = 12;    ///< G
  int n_taps = 5;            ///< L, delay-domain taps per link
  int cp_length = 16;        ///< cyclic prefix length in samples
  double rician_k_db = 3.0;  ///< K-factor of tap 0 on surface-segment links
  double pdp_decay = 0.5;    ///< exponential power-delay-profile decay rate
  std::uint64_t seed = 1;    ///< salt mixed into derived channel streams

  void validate() const;
};

enum class PhaseMode {
  kAllZeroPhase,   ///< every reflection coefficient is 1
  kUniformRandom,  ///< phases i.i.d. uniform on [0, 2*pi)
};

struct ChannelRealization {
  Eigen::VectorXcd h_direct;                ///< direct-link CFR, length N
  std::vector<Eigen::VectorXcd> h_tx_ris;   ///< per sub-surface, length N each
  std::vector<Eigen::VectorXcd> h_ris_rx;   ///< per sub-surface, length N each
  Eigen::VectorXcd phase_shifts;            ///< unit-modulus, length G
  Eigen::VectorXcd h_composite;             ///< effective CFR seen by the receiver
};

/// Draws one L-tap link and returns its N-point CFR. Taps follow a
/// normalized exponential power-delay profile (sum of tap powers = 1).
/// With rician=true, tap 0 carries a deterministic line-of-sight part with
/// the configured K-factor; otherwise all taps are zero-mean complex
/// Gaussian. The CFR is the DFT of the zero-padded tap vector.
Eigen::VectorXcd draw_tap_channel(const ChannelConfig& cfg, bool rician, Rng& rng);

/// Unit-modulus reflection coefficients for G sub-surfaces.
Eigen::VectorXcd make_phase_shifts(int n_subsurfaces, PhaseMode mode, Rng& rng);

/// Composite CFR: h_direct + sum_g phase[g] * (h_tx_ris[g] .* h_ris_rx[g]).
/// Throws if list lengths disagree or any |phase| deviates from 1.
ChannelRealization compose_channel(const Eigen::VectorXcd& direct,
                                   const std::vector<Eigen::VectorXcd>& tx_ris,
                                   const std::vector<Eigen::VectorXcd>& ris_rx,
                                   const Eigen::VectorXcd& phase_shifts);

/// One full channel realization: Rayleigh direct link, Rician surface
/// segments, fresh phase shifts per `mode`.
ChannelRealization draw_channel(const ChannelConfig& cfg, PhaseMode mode, Rng& rng);

}  // namespace rspnet::channel
