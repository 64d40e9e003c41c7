#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include "rspnet/commands.hpp"

namespace rspnet::cli {

namespace {

struct Check {
  std::string name;
  std::function<void(bool corrupt)> run;  // throws std::runtime_error on failure
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

std::string num(double v) { return format_double(v); }

double q_func(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

void zadoff_chu_unit_modulus(bool) {
  for (int n : {32, 63}) {
    for (int root : {1, 5}) {
      const auto seq = waveform::zadoff_chu(n, root);
      for (Eigen::Index i = 0; i < seq.size(); ++i)
        require(std::abs(std::abs(seq[i]) - 1.0) < 1e-12,
                "zc entry " + std::to_string(i) + " not unit modulus");
    }
  }
}

void zadoff_chu_ideal_autocorrelation(bool) {
  for (int n : {32, 63}) {
    const auto seq = waveform::zadoff_chu(n, 1);
    for (int shift = 1; shift < n; ++shift) {
      std::complex<double> acc = 0.0;
      for (int i = 0; i < n; ++i) acc += seq[i] * std::conj(seq[(i + shift) % n]);
      require(std::abs(acc) < 1e-9 * n,
              "autocorrelation at shift " + std::to_string(shift) + " is " + num(std::abs(acc)));
    }
  }
}

void qpsk_roundtrip_exact(bool) {
  Rng rng(42);
  const auto bits = waveform::random_bits(2000, rng);
  const auto back = waveform::qpsk_demodulate(waveform::qpsk_modulate(bits));
  require(back == bits, "modulate/demodulate round trip changed bits");
  const auto sym = waveform::qpsk_modulate(bits);
  for (Eigen::Index i = 0; i < sym.size(); ++i)
    require(std::abs(std::abs(sym[i]) - 1.0) < 1e-12, "qpsk symbol energy not 1");
}

void reshape_roundtrip(bool) {
  Rng rng(7);
  Eigen::VectorXcd v(33);
  for (auto& x : v) x = rng.complex_normal();
  const Eigen::VectorXd r = models::complex_to_real(v);
  require(r.size() == 66, "stacked vector has wrong length");
  require((models::real_to_complex(r) - v).norm() < 1e-15, "reshape round trip drifted");
  // real parts first, imaginary parts second
  require(r[0] == v[0].real() && r[33] == v[0].imag(), "stacking order violated");

  Eigen::VectorXcd y(33);
  for (auto& x : y) x = rng.complex_normal();
  const Eigen::VectorXd sp = models::splice_fus_input(v, y);
  require(sp.size() == 132 && sp[0] == v[0].real() && sp[66] == y[0].real(),
          "fusion splice layout violated");
}

void phase_shifts_unit_modulus(bool) {
  Rng rng(3);
  const auto phi = channel::make_phase_shifts(64, channel::PhaseMode::kUniformRandom, rng);
  for (Eigen::Index g = 0; g < phi.size(); ++g)
    require(std::abs(std::abs(phi[g]) - 1.0) < 1e-12, "random phase not unit modulus");
  const auto ones = channel::make_phase_shifts(4, channel::PhaseMode::kAllZeroPhase, rng);
  require((ones.array() - 1.0).abs().maxCoeff() < 1e-15, "zero-phase mode must give 1");
}

void composite_channel_linearity(bool) {
  Rng rng(11);
  channel::ChannelConfig cfg;
  cfg.n_subsurfaces = 3;
  Eigen::VectorXcd direct = channel::draw_tap_channel(cfg, false, rng);
  std::vector<Eigen::VectorXcd> tx(3), rx(3);
  for (int g = 0; g < 3; ++g) {
    tx[g] = channel::draw_tap_channel(cfg, true, rng);
    rx[g] = channel::draw_tap_channel(cfg, true, rng);
  }
  Eigen::VectorXcd phi = channel::make_phase_shifts(3, channel::PhaseMode::kUniformRandom, rng);
  const auto plus = channel::compose_channel(direct, tx, rx, phi);
  const auto minus = channel::compose_channel(direct, tx, rx, -phi);
  const Eigen::VectorXcd mid = 0.5 * (plus.h_composite + minus.h_composite);
  require((mid - direct).norm() < 1e-12, "surface term is not linear in the phases");
}

void composite_channel_brute_force(bool) {
  Rng rng(13);
  channel::ChannelConfig cfg;
  cfg.n_subsurfaces = 5;
  Eigen::VectorXcd direct = channel::draw_tap_channel(cfg, false, rng);
  std::vector<Eigen::VectorXcd> tx(5), rx(5);
  for (int g = 0; g < 5; ++g) {
    tx[g] = channel::draw_tap_channel(cfg, true, rng);
    rx[g] = channel::draw_tap_channel(cfg, true, rng);
  }
  const auto phi = channel::make_phase_shifts(5, channel::PhaseMode::kUniformRandom, rng);
  const auto real = channel::compose_channel(direct, tx, rx, phi);
  for (Eigen::Index k = 0; k < direct.size(); ++k) {
    std::complex<double> sum = direct[k];
    for (int g = 0; g < 5; ++g) sum += phi[g] * tx[g][k] * rx[g][k];
    require(std::abs(real.h_composite[k] - sum) < 1e-12,
            "composite disagrees with scalar evaluation");
  }
}

void channel_energy_normalization(bool) {
  channel::ChannelConfig cfg;
  Rng rng(101);
  for (bool rician : {false, true}) {
    double acc = 0.0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i)
      acc += channel::draw_tap_channel(cfg, rician, rng).squaredNorm() / cfg.n_subcarriers;
    const double mean = acc / draws;
    require(std::abs(mean - 1.0) < 0.03,
            std::string("per-link energy drifted: mean |H|^2 = ") + num(mean) +
                (rician ? " (rician)" : " (rayleigh)"));
  }
}

void noise_calibration(bool) {
  Rng rng(202);
  const int draws = 1000000;
  double p = 0.0, re = 0.0, im = 0.0, cross = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto z = rng.complex_normal();
    p += std::norm(z);
    re += z.real();
    im += z.imag();
    cross += z.real() * z.imag();
  }
  p /= draws;
  cross /= draws;
  require(std::abs(p - 1.0) < 0.01, "complex normal power off: " + num(p));
  require(std::abs(re / draws) < 0.005 && std::abs(im / draws) < 0.005,
          "complex normal mean is biased");
  require(std::abs(cross / 0.5) < 0.01, "re/im components are correlated");
}

void qpsk_awgn_ber_matches_closed_form(bool) {
  Rng rng(303);
  for (double snr_db : {6.0, 8.0, 20.0}) {
    const double noise_var = waveform::snr_to_noise_var(snr_db, 1.0);
    const double sigma = std::sqrt(noise_var);
    const int n_bits = 600000;
    const auto bits = waveform::random_bits(n_bits, rng);
    Eigen::VectorXcd sym = waveform::qpsk_modulate(bits);
    for (Eigen::Index i = 0; i < sym.size(); ++i) sym[i] += sigma * rng.complex_normal();
    const double observed = pipeline::ber(waveform::qpsk_demodulate(sym), bits);
    const double expected = q_func(1.0 / sigma);  // per-bit error of Gray QPSK in AWGN
    const double std_err = std::sqrt(std::max(expected * (1.0 - expected), 1e-12) / n_bits);
    require(std::abs(observed - expected) < 4.0 * std_err + 1e-9,
            "awgn ber at " + num(snr_db) + " dB: observed " + num(observed) + ", closed form " +
                num(expected));
  }
}

void perfect_csi_chain_recovers_bits(bool) {
  pipeline::SystemConfig sys;
  const Eigen::VectorXcd pilot = sys.pilot();
  for (int f = 0; f < 200; ++f) {
    Rng rng = Rng::derive(404, static_cast<std::uint64_t>(f));
    const auto chan = channel::draw_channel(sys.channel, sys.phase_mode, rng);
    const auto frame = waveform::random_frame(pilot, sys.split, chan.h_composite, 0.0, rng);
    const auto zf = estimators::zf_equalize(frame.received, chan.h_composite);
    require(zf.erased.empty(), "noiseless composite channel hit the erasure guard");
    const Eigen::VectorXcd s = estimators::cancel_pilot(zf.s_zf, pilot, sys.split);
    require((s - frame.data_symbols).cwiseAbs().maxCoeff() < 1e-9,
            "perfect-CSI equalization did not recover the data symbols");
    require(waveform::qpsk_demodulate(s) == frame.data_bits,
            "perfect-CSI detection flipped bits");
  }
}

void lmmse_matches_direct_inverse(bool) {
  Rng rng(505);
  const int n = 8;
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) a(r, c) = rng.complex_normal();
  const Eigen::MatrixXcd cov = a * a.adjoint() / n + Eigen::MatrixXcd::Identity(n, n);

  waveform::PowerSplit split;
  const double noise_var = 0.25;
  const double c_reg = (noise_var + split.data_power() * cov.diagonal().real().mean()) /
                       split.pilot_power();
  const Eigen::MatrixXcd direct =
      cov * (cov + c_reg * Eigen::MatrixXcd::Identity(n, n)).inverse();
  const Eigen::MatrixXcd fast = estimators::lmmse_weights(cov, split, noise_var);
  require((direct - fast).cwiseAbs().maxCoeff() < 1e-10,
          "lmmse filter disagrees with the direct inverse");
}

void zf_erasure_bookkeeping(bool) {
  Eigen::VectorXcd y = Eigen::VectorXcd::Ones(4);
  Eigen::VectorXcd h = Eigen::VectorXcd::Ones(4);
  h[2] = 1e-12;  // below the erasure floor
  const auto r = estimators::zf_equalize(y, h);
  require(r.erased == std::vector<int>{2}, "erasure index list wrong");
  require(std::abs(r.s_zf[2]) == 0.0, "erased subcarrier must be zeroed");
  require(std::abs(r.s_zf[0] - 1.0) < 1e-15, "healthy subcarriers must divide through");
}

void gradient_check_small_nets(bool corrupt) {
  Rng rng(606);
  const int n = 2;
  auto ce = models::CeNet::create(n, 1e-4, rng);
  auto fus = models::FusNet::create(n, 1e-4, rng);
  for (nn::Mlp* net : {&ce.net, &fus.net}) {
    const Eigen::Index in = net->input_dim(), out = net->output_dim();
    Eigen::MatrixXd batch(16, in), label(16, out);
    for (Eigen::Index r = 0; r < 16; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) batch(r, c) = rng.normal();
      for (Eigen::Index c = 0; c < out; ++c) label(r, c) = rng.normal();
    }
    if (corrupt && net == &ce.net) {
      // negative control: recompute with a doubled analytic gradient and
      // demand that the checker still accepts it
      nn::Mlp probe = *net;
      nn::ForwardCache cache;
      nn::forward(probe, batch, cache);
      nn::Gradients g = nn::backward(probe, cache, label);
      Eigen::Index wr = 0, wc = 0;
      g.d_weights[0].cwiseAbs().maxCoeff(&wr, &wc);
      const double an = 2.0 * g.d_weights[0](wr, wc);  // corrupted analytic value
      nn::Mlp fd_net = *net;
      auto loss_at = [&](double delta) {
        nn::Mlp scratch = fd_net;
        scratch.layers[0].weights(wr, wc) += delta;
        nn::ForwardCache c2;
        const Eigen::MatrixXd p = nn::forward(scratch, batch, c2);
        return nn::loss_mse_l2(p, label, scratch);
      };
      const double fd = (loss_at(1e-5) - loss_at(-1e-5)) / 2e-5;
      const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-3});
      require(rel < 1e-4, "corrupted gradient detected: rel error " + num(rel));
      continue;
    }
    const auto res = nn::grad_check(*net, batch, label, 1e-5, 1e-4);
    require(res.passed, "gradient check failed at " + res.worst_param + " with rel error " +
                            num(res.max_rel_error));
  }
}

void adam_converges_on_quadratic(bool) {
  Rng rng(707);
  nn::Mlp net = nn::make_mlp({1, 1}, {nn::Activation::kLinear}, 0.0, rng);
  nn::AdamState state;
  state.lr = 0.01;
  nn::Gradients g;
  g.d_weights.resize(1);
  g.d_biases = {Eigen::VectorXd::Zero(1)};
  g.d_gamma = Eigen::VectorXd::Zero(1);
  g.d_beta = Eigen::VectorXd::Zero(1);
  for (int step = 0; step < 10000; ++step) {
    const double w = net.layers[0].weights(0, 0);
    g.d_weights[0] = Eigen::MatrixXd::Constant(1, 1, 2.0 * (w - 3.0));
    nn::adam_step(net, g, state);
  }
  const double w = net.layers[0].weights(0, 0);
  require(std::abs(w - 3.0) < 1e-2,
          "adam did not settle on the quadratic minimum: w = " + num(w));
}

void batchnorm_running_stats_converge(bool) {
  Rng rng(808);
  nn::Mlp net = nn::make_mlp({3, 3}, {nn::Activation::kLinear}, 0.0, rng);
  const Eigen::Vector3d true_mean(2.0, -1.0, 0.5);
  const Eigen::Vector3d true_std(0.5, 2.0, 1.0);
  nn::ForwardCache cache;
  for (int step = 0; step < 400; ++step) {
    Eigen::MatrixXd batch(256, 3);
    for (Eigen::Index r = 0; r < batch.rows(); ++r)
      for (Eigen::Index c = 0; c < 3; ++c)
        batch(r, c) = true_mean[c] + true_std[c] * rng.normal();
    nn::forward(net, batch, cache);
  }
  require((net.bn.running_mean - true_mean).cwiseAbs().maxCoeff() < 0.1,
          "running mean did not converge");
  const Eigen::Vector3d var = true_std.array().square();
  require(((net.bn.running_var - var).cwiseAbs().array() / var.array()).maxCoeff() < 0.1,
          "running variance did not converge");
}

void energy_ledger_identity(bool) {
  analysis::ResourceModel m;
  m.n_data = 48;
  m.n_pilot = 16;
  m.symbol_time = 2.0;
  m.symbol_power = 3.0;
  m.lambda = 0.15;
  const auto r = analysis::energy_accounting(m);
  const double t0p = m.symbol_time * m.symbol_power;
  const double direct_saved =
      m.n_data * t0p * m.lambda + m.n_pilot * t0p * (1.0 - m.lambda);
  require(std::abs(r.energy_saved - direct_saved) < 1e-12,
          "saved energy disagrees with the closed form");
  require(std::abs(r.energy_baseline - (r.energy_superimposed + r.energy_saved)) < 1e-12,
          "energy ledger does not balance");
  require(r.bandwidth_superimposed < r.bandwidth_baseline, "bandwidth must shrink");
}

void complexity_closed_forms(bool) {
  const auto rows = analysis::complexity_table({32, 64});
  require(rows[0].proposed == 86016 && rows[0].mmse_chain == 200768,
          "N=32 complexity values off");
  require(rows[1].proposed == 344064 && rows[1].mmse_chain == 1589376,
          "N=64 complexity values off");
  require(rows[0].ratio > 2.0 && rows[1].ratio > 4.0, "complexity ratio out of range");
}

void checkpoint_roundtrip_bit_exact(bool) {
  Rng rng(909);
  auto ce = models::CeNet::create(4, 1e-4, rng);
  const std::string p1 = "/tmp/rspnet_selftest_a.ckpt";
  const std::string p2 = "/tmp/rspnet_selftest_b.ckpt";
  models::save(ce, p1);
  auto back = models::load_ce(p1);
  models::save(back, p2);
  std::ifstream f1(p1), f2(p2);
  std::stringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  require(s1.str() == s2.str(), "save/load/save is not bit identical");

  Eigen::VectorXcd probe(4);
  Rng prng(910);
  for (auto& x : probe) x = prng.complex_normal();
  ce.trained = true;
  require((models::ce_net_infer(ce, probe) - models::ce_net_infer(back, probe)).norm() == 0.0,
          "loaded net computes different outputs");
}

void config_roundtrip_identity(bool) {
  ExperimentConfig cfg = default_config();
  cfg.system.split.lambda = 0.125;
  cfg.train.lr = 0.00073;
  cfg.sweep.snr_db = {0, 7.5, 15};
  cfg.run.seed = 987654321;
  const std::string text = serialize_config(cfg);
  const ExperimentConfig parsed = parse_config_text(text, "roundtrip");
  require(serialize_config(parsed) == text, "parse/serialize round trip changed the config");
}

}  // namespace

int cmd_selftest(bool corrupt_grad, std::ostream& out) {
  const std::vector<Check> checks = {
      {"zadoff_chu_unit_modulus", zadoff_chu_unit_modulus},
      {"zadoff_chu_ideal_autocorrelation", zadoff_chu_ideal_autocorrelation},
      {"qpsk_roundtrip_exact", qpsk_roundtrip_exact},
      {"reshape_roundtrip", reshape_roundtrip},
      {"phase_shifts_unit_modulus", phase_shifts_unit_modulus},
      {"composite_channel_linearity", composite_channel_linearity},
      {"composite_channel_brute_force", composite_channel_brute_force},
      {"channel_energy_normalization", channel_energy_normalization},
      {"noise_calibration", noise_calibration},
      {"qpsk_awgn_ber_matches_closed_form", qpsk_awgn_ber_matches_closed_form},
      {"perfect_csi_chain_recovers_bits", perfect_csi_chain_recovers_bits},
      {"lmmse_matches_direct_inverse", lmmse_matches_direct_inverse},
      {"zf_erasure_bookkeeping", zf_erasure_bookkeeping},
      {"gradient_check_small_nets", gradient_check_small_nets},
      {"adam_converges_on_quadratic", adam_converges_on_quadratic},
      {"batchnorm_running_stats_converge", batchnorm_running_stats_converge},
      {"energy_ledger_identity", energy_ledger_identity},
      {"complexity_closed_forms", complexity_closed_forms},
      {"checkpoint_roundtrip_bit_exact", checkpoint_roundtrip_bit_exact},
      {"config_roundtrip_identity", config_roundtrip_identity},
  };

  int failures = 0;
  for (const auto& check : checks) {
    try {
      check.run(corrupt_grad);
      out << "PASS " << check.name << "\n";
    } catch (const std::exception& e) {
      out << "FAIL " << check.name << ": " << e.what() << "\n";
      ++failures;
    }
  }
  out << (failures == 0 ? "selftest: all " : "selftest: FAILED, ")
      << (failures == 0 ? std::to_string(checks.size()) + " properties hold"
                        : std::to_string(failures) + " of " + std::to_string(checks.size()) +
                              " properties violated")
      << "\n";
  return failures == 0 ? 0 : 3;
}

}  // namespace rspnet::cli
