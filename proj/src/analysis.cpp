#include "rspnet/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace rspnet::analysis {

std::vector<ComplexityRow> complexity_table(const std::vector<int>& n_values) {
  std::vector<ComplexityRow> rows;
  rows.reserve(n_values.size());
  for (int n : n_values) {
    if (n <= 0) throw std::invalid_argument("complexity_table: N must be positive");
    ComplexityRow r;
    r.n_subcarriers = n;
    const std::int64_t n64 = n;
    r.proposed = 84 * n64 * n64;
    r.mmse_chain = 6 * n64 * n64 * n64 + 4 * n64 * n64 + 2 * n64;
    r.ratio = static_cast<double>(r.mmse_chain) / static_cast<double>(r.proposed);
    rows.push_back(r);
  }
  return rows;
}

void ResourceModel::validate() const {
  if (n_data < 0 || n_pilot < 0)
    throw std::invalid_argument("resource model: symbol counts must be >= 0");
  if (!(symbol_time > 0.0) || !(symbol_power > 0.0))
    throw std::invalid_argument("resource model: T0 and P must be positive");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("resource model: lambda must be in [0, 1]");
}

EnergyReport energy_accounting(const ResourceModel& m) {
  m.validate();
  EnergyReport r;
  const double t0p = m.symbol_time * m.symbol_power;
  r.energy_baseline = static_cast<double>(m.n_data + m.n_pilot) * t0p;
  // superimposed frames carry data at (1-lambda)P; the pilot part reuses
  // the same symbols at lambda*P, and the dedicated pilot slots disappear
  r.energy_superimposed = static_cast<double>(m.n_data) * t0p * (1.0 - m.lambda) +
                          static_cast<double>(m.n_pilot) * t0p * m.lambda;
  r.energy_saved = r.energy_baseline - r.energy_superimposed;
  r.bandwidth_baseline = static_cast<double>(m.n_data + m.n_pilot) * m.symbol_time;
  r.bandwidth_superimposed = static_cast<double>(m.n_data) * m.symbol_time;
  return r;
}

namespace {

struct BenchFrame {
  waveform::Frame frame;
  Eigen::VectorXcd h_ls;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

RuntimeBenchResult runtime_bench(const pipeline::SystemConfig& sys,
                                 const pipeline::CellModels& cell, double snr_db,
                                 int n_frames, int repetitions, std::uint64_t seed) {
  sys.validate();
  if (n_frames < 100)
    throw std::invalid_argument("runtime_bench: need at least 100 frames for stable timing");
  if (repetitions < 1)
    throw std::invalid_argument("runtime_bench: repetitions must be >= 1");
  if (!cell.ce.trained || !cell.fus.trained)
    throw std::invalid_argument("runtime_bench: cell models must be trained");
  const int n = sys.channel.n_subcarriers;
  if (cell.ce.n_subcarriers != n || cell.channel_cov.rows() != n)
    throw std::invalid_argument("runtime_bench: cell models do not match system config");

  const Eigen::VectorXcd pilot = sys.pilot();
  const double noise_var = waveform::snr_to_noise_var(snr_db, sys.split.total_power);

  // identical workload for both chains, generated outside the timed region
  std::vector<BenchFrame> frames(n_frames);
  for (int f = 0; f < n_frames; ++f) {
    Rng rng = Rng::derive(seed, mix_stream({pipeline::stream::kBench,
                                            static_cast<std::uint64_t>(f)}));
    const auto chan = channel::draw_channel(sys.channel, sys.phase_mode, rng);
    frames[f].frame =
        waveform::random_frame(pilot, sys.split, chan.h_composite, noise_var, rng);
    frames[f].h_ls = estimators::ls_estimate(frames[f].frame.received, pilot, sys.split, true);
  }

  double sink = 0.0;  // consumed below so the timed work cannot be elided

  auto time_pass = [&](auto&& body) {
    const auto start = std::chrono::steady_clock::now();
    for (const BenchFrame& bf : frames) body(bf);
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count();
  };

  std::vector<double> t_prop, t_mmse;
  for (int rep = 0; rep < repetitions; ++rep) {
    t_prop.push_back(time_pass([&](const BenchFrame& bf) {
      const Eigen::VectorXcd h_ce = models::ce_net_infer(cell.ce, bf.h_ls);
      const auto zf = estimators::zf_equalize(bf.frame.received, h_ce);
      const Eigen::VectorXcd s_coarse = estimators::cancel_pilot(zf.s_zf, pilot, sys.split);
      const Eigen::VectorXcd s_fus = models::fus_net_infer(
          cell.fus, models::splice_fus_input(s_coarse, bf.frame.received));
      sink += s_fus[0].real();
    }));
    t_mmse.push_back(time_pass([&](const BenchFrame& bf) {
      // fresh N x N system per frame, as a per-frame LMMSE receiver pays
      Eigen::MatrixXcd w =
          estimators::lmmse_weights(cell.channel_cov, sys.split, noise_var);
      const Eigen::VectorXcd h_mmse = w * bf.h_ls;
      const Eigen::VectorXcd s = estimators::mmse_detect(bf.frame.received, h_mmse, pilot,
                                                         sys.split, noise_var);
      sink += s[0].real();
    }));
  }

  RuntimeBenchResult r;
  r.proposed_s = median(t_prop);
  r.mmse_chain_s = median(t_mmse);
  r.ratio = r.mmse_chain_s / r.proposed_s;
  r.n_frames = n_frames;
  r.repetitions = repetitions;
  if (!std::isfinite(sink)) throw std::runtime_error("runtime_bench: non-finite outputs");
  return r;
}

}  // namespace rspnet::analysis
