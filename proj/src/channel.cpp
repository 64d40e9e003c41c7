#include "rspnet/channel.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace rspnet::channel {

void ChannelConfig::validate() const {
  if (n_subcarriers <= 0) throw std::invalid_argument("channel: n_subcarriers must be positive");
  if (n_subsurfaces < 0) throw std::invalid_argument("channel: n_subsurfaces must be >= 0");
  if (n_taps <= 0) throw std::invalid_argument("channel: n_taps must be positive");
  if (cp_length <= 0) throw std::invalid_argument("channel: cp_length must be positive");
  if (n_taps > cp_length)
    throw std::invalid_argument("channel: n_taps must not exceed cp_length");
  if (n_taps > n_subcarriers)
    throw std::invalid_argument("channel: n_taps must not exceed n_subcarriers");
  if (pdp_decay < 0.0) throw std::invalid_argument("channel: pdp_decay must be >= 0");
  if (!std::isfinite(pdp_decay) || !std::isfinite(rician_k_db))
    throw std::invalid_argument("channel: parameters must be finite");
}

Eigen::VectorXcd draw_tap_channel(const ChannelConfig& cfg, bool rician, Rng& rng) {
  cfg.validate();
  const int n = cfg.n_subcarriers;
  const int l_taps = cfg.n_taps;

  // normalized exponential PDP: p_l = exp(-decay*l) / sum
  Eigen::VectorXd pdp(l_taps);
  for (int l = 0; l < l_taps; ++l) pdp[l] = std::exp(-cfg.pdp_decay * l);
  pdp /= pdp.sum();

  Eigen::VectorXcd taps(l_taps);
  for (int l = 0; l < l_taps; ++l) {
    std::complex<double> g = rng.complex_normal();
    if (rician && l == 0) {
      const double k = std::pow(10.0, cfg.rician_k_db / 10.0);
      // deterministic LOS phase 0 on the specular part
      g = std::sqrt(k / (k + 1.0)) + std::sqrt(1.0 / (k + 1.0)) * g;
    }
    taps[l] = std::sqrt(pdp[l]) * g;
  }

  // CFR[k] = sum_l taps[l] * exp(-j*2*pi*k*l/N), evaluated with a per-tap
  // twiddle recurrence instead of N*L transcendental calls
  Eigen::VectorXcd base(n), cur(n), cfr = Eigen::VectorXcd::Zero(n);
  for (int k = 0; k < n; ++k) {
    base[k] = std::polar(1.0, -2.0 * std::numbers::pi * k / n);
    cur[k] = 1.0;
  }
  for (int l = 0; l < l_taps; ++l) {
    cfr += taps[l] * cur;
    if (l + 1 < l_taps) cur = cur.cwiseProduct(base);
  }
  return cfr;
}

Eigen::VectorXcd make_phase_shifts(int n_subsurfaces, PhaseMode mode, Rng& rng) {
  if (n_subsurfaces < 0)
    throw std::invalid_argument("make_phase_shifts: n_subsurfaces must be >= 0");
  Eigen::VectorXcd phi(n_subsurfaces);
  for (int g = 0; g < n_subsurfaces; ++g) {
    switch (mode) {
      case PhaseMode::kAllZeroPhase:
        phi[g] = 1.0;
        break;
      case PhaseMode::kUniformRandom:
        phi[g] = std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));
        break;
    }
  }
  return phi;
}

ChannelRealization compose_channel(const Eigen::VectorXcd& direct,
                                   const std::vector<Eigen::VectorXcd>& tx_ris,
                                   const std::vector<Eigen::VectorXcd>& ris_rx,
                                   const Eigen::VectorXcd& phase_shifts) {
  const auto g_count = static_cast<std::size_t>(phase_shifts.size());
  if (tx_ris.size() != g_count || ris_rx.size() != g_count)
    throw std::invalid_argument("compose_channel: segment list sizes disagree");
  const Eigen::Index n = direct.size();
  for (std::size_t g = 0; g < g_count; ++g) {
    if (tx_ris[g].size() != n || ris_rx[g].size() != n)
      throw std::invalid_argument("compose_channel: segment length mismatch");
  }
  for (Eigen::Index g = 0; g < phase_shifts.size(); ++g) {
    if (std::abs(std::abs(phase_shifts[g]) - 1.0) > 1e-9)
      throw std::invalid_argument("compose_channel: phase shifts must be unit modulus");
  }

  ChannelRealization real;
  real.h_direct = direct;
  real.h_tx_ris = tx_ris;
  real.h_ris_rx = ris_rx;
  real.phase_shifts = phase_shifts;
  real.h_composite = direct;
  for (std::size_t g = 0; g < g_count; ++g)
    real.h_composite += phase_shifts[static_cast<Eigen::Index>(g)] *
                        tx_ris[g].cwiseProduct(ris_rx[g]);
  return real;
}

ChannelRealization draw_channel(const ChannelConfig& cfg, PhaseMode mode, Rng& rng) {
  cfg.validate();
  Eigen::VectorXcd direct = draw_tap_channel(cfg, false, rng);
  std::vector<Eigen::VectorXcd> tx_ris(cfg.n_subsurfaces), ris_rx(cfg.n_subsurfaces);
  for (int g = 0; g < cfg.n_subsurfaces; ++g) {
    tx_ris[g] = draw_tap_channel(cfg, true, rng);
    ris_rx[g] = draw_tap_channel(cfg, true, rng);
  }
  Eigen::VectorXcd phi = make_phase_shifts(cfg.n_subsurfaces, mode, rng);
  return compose_channel(direct, tx_ris, ris_rx, phi);
}

}  // namespace rspnet::channel
