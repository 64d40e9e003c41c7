#include "rspnet/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace rspnet::pipeline {

Eigen::VectorXcd SystemConfig::pilot() const {
  return waveform::zadoff_chu(channel.n_subcarriers, zc_root);
}

void SystemConfig::validate() const {
  channel.validate();
  split.validate();
  // pure-pilot and pure-data splits break LS estimation / pilot removal
  if (!(split.lambda > 0.0 && split.lambda < 1.0))
    throw std::invalid_argument("system: lambda must be in (0, 1)");
  if (zc_root <= 0 || zc_root >= channel.n_subcarriers)
    throw std::invalid_argument("system: zc_root must be in (0, n_subcarriers)");
}

void TrainConfig::validate() const {
  if (n_train < 2) throw std::invalid_argument("train: n_train must be >= 2");
  if (n_val < 1) throw std::invalid_argument("train: n_val must be >= 1");
  if (batch < 2) throw std::invalid_argument("train: batch must be >= 2 for batch norm");
  if (batch > n_train) throw std::invalid_argument("train: batch must not exceed n_train");
  if (epochs_ce < 0 || epochs_fus < 0)
    throw std::invalid_argument("train: epochs must be >= 0");
  if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be positive");
  if (l2_ce < 0.0 || l2_fus < 0.0) throw std::invalid_argument("train: l2 must be >= 0");
  if (snr_grid_db.empty()) throw std::invalid_argument("train: snr grid must be non-empty");
}

double nmse(const Eigen::VectorXcd& h_hat, const Eigen::VectorXcd& h_true) {
  if (h_hat.size() != h_true.size()) throw std::invalid_argument("nmse: length mismatch");
  const double denom = h_true.squaredNorm();
  if (!(denom > 0.0)) throw std::invalid_argument("nmse: reference has zero energy");
  return (h_hat - h_true).squaredNorm() / denom;
}

double ber(const std::vector<std::uint8_t>& detected, const std::vector<std::uint8_t>& sent) {
  if (detected.size() != sent.size()) throw std::invalid_argument("ber: length mismatch");
  if (sent.empty()) throw std::invalid_argument("ber: empty bit vectors");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < sent.size(); ++i) errors += detected[i] != sent[i];
  return static_cast<double>(errors) / static_cast<double>(sent.size());
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (count < 0) throw std::invalid_argument("parallel_for: count must be >= 0");
  if (workers < 1) throw std::invalid_argument("parallel_for: workers must be >= 1");
  if (workers == 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int n_threads = std::min(workers, count);
  const int chunk = (count + n_threads - 1) / n_threads;
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int t = 0; t < n_threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(count, begin + chunk);
    pool.emplace_back([&, begin, end] {
      try {
        for (int i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

std::uint64_t lambda_bits(double lambda) { return std::bit_cast<std::uint64_t>(lambda); }

struct SampleDraw {
  channel::ChannelRealization chan;
  waveform::Frame frame;
  Eigen::VectorXcd h_ls;
  double snr_db = 0.0;
};

SampleDraw draw_sample(const TrainConfig& tc, const SystemConfig& sys,
                       const Eigen::VectorXcd& pilot, std::uint64_t stream_kind, int index) {
  Rng rng = Rng::derive(tc.seed, mix_stream({stream_kind, sys.channel.seed,
                                             lambda_bits(sys.split.lambda),
                                             static_cast<std::uint64_t>(sys.channel.n_taps),
                                             static_cast<std::uint64_t>(index)}));
  SampleDraw s;
  s.snr_db = tc.snr_grid_db[rng.uniform_int(tc.snr_grid_db.size())];
  const double noise_var = waveform::snr_to_noise_var(s.snr_db, sys.split.total_power);
  s.chan = channel::draw_channel(sys.channel, sys.phase_mode, rng);
  s.frame = waveform::random_frame(pilot, sys.split, s.chan.h_composite, noise_var, rng);
  s.h_ls = estimators::ls_estimate(s.frame.received, pilot, sys.split, sys.ls_normalized);
  return s;
}

}  // namespace

Dataset gen_ce_dataset(const TrainConfig& tc, const SystemConfig& sys, int count,
                       std::uint64_t stream_kind, int workers) {
  tc.validate();
  sys.validate();
  if (count < 1) throw std::invalid_argument("gen_ce_dataset: count must be >= 1");
  const int n = sys.channel.n_subcarriers;
  const Eigen::VectorXcd pilot = sys.pilot();

  Dataset ds;
  ds.inputs.resize(count, 2 * n);
  ds.labels.resize(count, 2 * n);
  ds.meta.resize(count);
  parallel_for(count, workers, [&](int i) {
    const SampleDraw s = draw_sample(tc, sys, pilot, stream_kind, i);
    ds.inputs.row(i) = models::complex_to_real(s.h_ls).transpose();
    ds.labels.row(i) = models::complex_to_real(s.chan.h_composite).transpose();
    ds.meta[i].snr_db = s.snr_db;
  });
  return ds;
}

Dataset gen_fus_dataset(const TrainConfig& tc, const models::CeNet& ce,
                        const SystemConfig& sys, int count, std::uint64_t stream_kind,
                        int workers) {
  tc.validate();
  sys.validate();
  if (!ce.trained)
    throw std::invalid_argument("gen_fus_dataset: CE net must be trained first");
  if (ce.n_subcarriers != sys.channel.n_subcarriers)
    throw std::invalid_argument("gen_fus_dataset: CE net built for a different N");
  if (count < 1) throw std::invalid_argument("gen_fus_dataset: count must be >= 1");
  const int n = sys.channel.n_subcarriers;
  const Eigen::VectorXcd pilot = sys.pilot();

  Dataset ds;
  ds.inputs.resize(count, 4 * n);
  ds.labels.resize(count, 2 * n);
  ds.meta.resize(count);
  parallel_for(count, workers, [&](int i) {
    const SampleDraw s = draw_sample(tc, sys, pilot, stream_kind, i);
    const Eigen::VectorXcd h_ce = models::ce_net_infer(ce, s.h_ls);
    const auto zf = estimators::zf_equalize(s.frame.received, h_ce);
    const Eigen::VectorXcd s_coarse = estimators::cancel_pilot(zf.s_zf, pilot, sys.split);
    ds.inputs.row(i) = models::splice_fus_input(s_coarse, s.frame.received).transpose();
    ds.labels.row(i) = models::complex_to_real(s.frame.data_symbols).transpose();
    ds.meta[i].snr_db = s.snr_db;
  });
  return ds;
}

namespace {

// full-set loss with inference-mode batch norm, chunked to bound memory
double eval_loss(const nn::Mlp& net, const Dataset& ds) {
  const Eigen::Index chunk = 4096;
  double sq_err = 0.0;
  for (Eigen::Index start = 0; start < ds.rows(); start += chunk) {
    const Eigen::Index rows = std::min(chunk, ds.rows() - start);
    const Eigen::MatrixXd pred = nn::forward(net, ds.inputs.middleRows(start, rows));
    sq_err += (ds.labels.middleRows(start, rows) - pred).squaredNorm();
  }
  double loss = sq_err / static_cast<double>(ds.rows());
  for (const auto& l : net.layers) loss += net.l2 * l.weights.squaredNorm();
  return loss;
}

}  // namespace

LossHistory train_mlp(nn::Mlp& net, const Dataset& train_set, const Dataset& val_set,
                      int epochs, double lr, int batch, Rng& rng) {
  net.validate();
  if (train_set.rows() < 2) throw std::invalid_argument("train_mlp: need at least 2 samples");
  if (val_set.rows() < 1) throw std::invalid_argument("train_mlp: empty validation set");
  if (batch < 2 || batch > train_set.rows())
    throw std::invalid_argument("train_mlp: batch must be in [2, n_train]");
  if (train_set.inputs.cols() != net.input_dim() ||
      train_set.labels.cols() != net.output_dim() ||
      val_set.inputs.cols() != net.input_dim() || val_set.labels.cols() != net.output_dim())
    throw std::invalid_argument("train_mlp: dataset width does not match network");
  if (epochs < 0) throw std::invalid_argument("train_mlp: epochs must be >= 0");

  LossHistory hist;
  hist.train_loss.push_back(eval_loss(net, train_set));
  hist.val_loss.push_back(eval_loss(net, val_set));

  nn::AdamState adam;
  adam.lr = lr;

  const Eigen::Index n_rows = train_set.rows();
  std::vector<Eigen::Index> perm(n_rows);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});

  Eigen::MatrixXd batch_in, batch_label;
  nn::ForwardCache cache;

  for (int epoch = 1; epoch <= epochs; ++epoch) {
    // Fisher-Yates, own RNG so shuffles are platform independent
    for (Eigen::Index i = n_rows - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
      std::swap(perm[i], perm[j]);
    }

    double epoch_loss = 0.0;
    int steps = 0;
    Eigen::Index start = 0;
    while (start < n_rows) {
      Eigen::Index size = std::min<Eigen::Index>(batch, n_rows - start);
      // batch norm cannot digest a single row; fold a lone straggler in
      if (n_rows - start - size == 1) size += 1;
      batch_in.resize(size, train_set.inputs.cols());
      batch_label.resize(size, train_set.labels.cols());
      for (Eigen::Index r = 0; r < size; ++r) {
        batch_in.row(r) = train_set.inputs.row(perm[start + r]);
        batch_label.row(r) = train_set.labels.row(perm[start + r]);
      }
      const Eigen::MatrixXd pred = nn::forward(net, batch_in, cache);
      const double step_loss = nn::loss_mse_l2(pred, batch_label, net);
      if (!std::isfinite(step_loss))
        throw std::runtime_error("train_mlp: training diverged (non-finite loss) at epoch " +
                                 std::to_string(epoch));
      epoch_loss += step_loss;
      ++steps;
      const nn::Gradients grads = nn::backward(net, cache, batch_label);
      nn::adam_step(net, grads, adam);
      start += size;
    }

    hist.train_loss.push_back(epoch_loss / steps);
    const double val = eval_loss(net, val_set);
    if (!std::isfinite(val))
      throw std::runtime_error("train_mlp: training diverged (non-finite validation loss)");
    hist.val_loss.push_back(val);
  }
  return hist;
}

LossHistory train_ce_net(models::CeNet& model, const Dataset& train_set,
                         const Dataset& val_set, const TrainConfig& tc) {
  tc.validate();
  Rng shuffle_rng = Rng::derive(tc.seed, mix_stream({stream::kShuffle, 1}));
  LossHistory hist =
      train_mlp(model.net, train_set, val_set, tc.epochs_ce, tc.lr, tc.batch, shuffle_rng);
  model.trained = true;
  return hist;
}

LossHistory train_fus_net(models::FusNet& model, const Dataset& train_set,
                          const Dataset& val_set, const TrainConfig& tc) {
  tc.validate();
  Rng shuffle_rng = Rng::derive(tc.seed, mix_stream({stream::kShuffle, 2}));
  LossHistory hist =
      train_mlp(model.net, train_set, val_set, tc.epochs_fus, tc.lr, tc.batch, shuffle_rng);
  model.trained = true;
  return hist;
}

TestPhaseResult run_test_phase(const models::CeNet& ce, const models::FusNet& fus,
                               const waveform::Frame& frame, bool ls_normalized,
                               std::vector<std::string>* trace) {
  if (!ce.trained || !fus.trained)
    throw std::invalid_argument("run_test_phase: both nets must be trained");
  if (ce.n_subcarriers != fus.n_subcarriers)
    throw std::invalid_argument("run_test_phase: nets built for different N");
  if (frame.received.size() != ce.n_subcarriers)
    throw std::invalid_argument("run_test_phase: frame size does not match nets");
  auto note = [&](const char* stage) {
    if (trace) trace->emplace_back(stage);
  };

  TestPhaseResult r;
  r.h_ls = estimators::ls_estimate(frame.received, frame.pilot, frame.split, ls_normalized);
  note("ls_estimate");
  const Eigen::VectorXd h_ls_real = models::complex_to_real(r.h_ls);
  note("complex_to_real");
  const Eigen::MatrixXd ce_out = nn::forward(ce.net, h_ls_real.transpose());
  note("ce_net_infer");
  r.h_ce = models::real_to_complex(ce_out.row(0).transpose());
  note("real_to_complex");
  const auto zf = estimators::zf_equalize(frame.received, r.h_ce);
  note("zf_equalize");
  r.s_coarse = estimators::cancel_pilot(zf.s_zf, frame.pilot, frame.split);
  note("cancel_pilot");
  const Eigen::VectorXd fus_in = models::splice_fus_input(r.s_coarse, frame.received);
  note("splice_fus_input");
  r.s_fus = models::fus_net_infer(fus, fus_in);
  note("fus_net_infer");
  r.detected_bits = waveform::qpsk_demodulate(r.s_fus);
  return r;
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {Method::kLsCe,        Method::kMmseCe,
                                              Method::kCeNet,       Method::kMmseCeMmseSd,
                                              Method::kCeNetZf,     Method::kProposed};
  return methods;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kLsCe: return "LS-CE";
    case Method::kMmseCe: return "MMSE-CE";
    case Method::kCeNet: return "CE-Net";
    case Method::kMmseCeMmseSd: return "MMSE-CE+MMSE-SD";
    case Method::kCeNetZf: return "CE-Net+ZF";
    case Method::kProposed: return "proposed";
  }
  throw std::logic_error("unknown method");
}

std::vector<std::uint8_t> detect_zf_cancel(const waveform::Frame& frame,
                                           const Eigen::VectorXcd& h_est) {
  const auto zf = estimators::zf_equalize(frame.received, h_est);
  const Eigen::VectorXcd s = estimators::cancel_pilot(zf.s_zf, frame.pilot, frame.split);
  return waveform::qpsk_demodulate(s);
}

namespace {

struct FrameMetrics {
  double nmse_ls = 0.0, nmse_mmse = 0.0, nmse_ce = 0.0;
  long err_ls = 0, err_mmse_zf = 0, err_mmse_sd = 0, err_ce_zf = 0, err_fus = 0;
};

long bit_errors(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  long e = 0;
  for (std::size_t i = 0; i < a.size(); ++i) e += a[i] != b[i];
  return e;
}

}  // namespace

std::vector<SweepRow> evaluate_cell(const SystemConfig& sys, const CellModels& cell,
                                    const std::vector<Method>& methods,
                                    const std::vector<double>& snr_grid_db, int n_frames,
                                    std::uint64_t seed, int workers) {
  sys.validate();
  if (n_frames < 1) throw std::invalid_argument("evaluate_cell: n_frames must be >= 1");
  if (snr_grid_db.empty()) throw std::invalid_argument("evaluate_cell: empty SNR grid");
  if (!cell.ce.trained || !cell.fus.trained)
    throw std::invalid_argument("evaluate_cell: cell models must be trained");
  const int n = sys.channel.n_subcarriers;
  if (cell.ce.n_subcarriers != n || cell.fus.n_subcarriers != n ||
      cell.channel_cov.rows() != n)
    throw std::invalid_argument("evaluate_cell: cell models do not match system config");

  const Eigen::VectorXcd pilot = sys.pilot();
  const long bits_per_frame = 2L * n;
  std::vector<SweepRow> rows;

  for (std::size_t si = 0; si < snr_grid_db.size(); ++si) {
    const double snr_db = snr_grid_db[si];
    const double noise_var = waveform::snr_to_noise_var(snr_db, sys.split.total_power);
    const Eigen::MatrixXcd w_mmse =
        estimators::lmmse_weights(cell.channel_cov, sys.split, noise_var);

    std::vector<FrameMetrics> metrics(n_frames);
    parallel_for(n_frames, workers, [&](int f) {
      Rng rng = Rng::derive(seed, mix_stream({stream::kSweep, sys.channel.seed,
                                              lambda_bits(sys.split.lambda),
                                              static_cast<std::uint64_t>(sys.channel.n_taps),
                                              static_cast<std::uint64_t>(si),
                                              static_cast<std::uint64_t>(f)}));
      const auto chan = channel::draw_channel(sys.channel, sys.phase_mode, rng);
      const auto frame =
          waveform::random_frame(pilot, sys.split, chan.h_composite, noise_var, rng);

      const Eigen::VectorXcd h_ls_norm =
          estimators::ls_estimate(frame.received, pilot, sys.split, true);
      const Eigen::VectorXcd h_ls_rep =
          sys.ls_normalized ? h_ls_norm
                            : estimators::ls_estimate(frame.received, pilot, sys.split, false);
      const Eigen::VectorXcd h_mmse = w_mmse * h_ls_norm;
      const Eigen::VectorXcd h_ls_feat =
          sys.ls_normalized ? h_ls_norm : h_ls_rep;  // must match the training convention
      const Eigen::VectorXcd h_ce = models::ce_net_infer(cell.ce, h_ls_feat);

      FrameMetrics& m = metrics[f];
      m.nmse_ls = nmse(h_ls_rep, chan.h_composite);
      m.nmse_mmse = nmse(h_mmse, chan.h_composite);
      m.nmse_ce = nmse(h_ce, chan.h_composite);

      m.err_ls = bit_errors(detect_zf_cancel(frame, h_ls_rep), frame.data_bits);
      m.err_mmse_zf = bit_errors(detect_zf_cancel(frame, h_mmse), frame.data_bits);
      const Eigen::VectorXcd s_mmse_sd =
          estimators::mmse_detect(frame.received, h_mmse, pilot, sys.split, noise_var);
      m.err_mmse_sd = bit_errors(waveform::qpsk_demodulate(s_mmse_sd), frame.data_bits);

      const auto zf = estimators::zf_equalize(frame.received, h_ce);
      const Eigen::VectorXcd s_coarse = estimators::cancel_pilot(zf.s_zf, pilot, sys.split);
      m.err_ce_zf = bit_errors(waveform::qpsk_demodulate(s_coarse), frame.data_bits);
      const Eigen::VectorXcd s_fus =
          models::fus_net_infer(cell.fus, models::splice_fus_input(s_coarse, frame.received));
      m.err_fus = bit_errors(waveform::qpsk_demodulate(s_fus), frame.data_bits);
    });

    FrameMetrics total;
    for (const auto& m : metrics) {  // fixed order, independent of workers
      total.nmse_ls += m.nmse_ls;
      total.nmse_mmse += m.nmse_mmse;
      total.nmse_ce += m.nmse_ce;
      total.err_ls += m.err_ls;
      total.err_mmse_zf += m.err_mmse_zf;
      total.err_mmse_sd += m.err_mmse_sd;
      total.err_ce_zf += m.err_ce_zf;
      total.err_fus += m.err_fus;
    }
    const double inv_frames = 1.0 / n_frames;
    const double inv_bits = 1.0 / (static_cast<double>(n_frames) * bits_per_frame);

    for (Method method : methods) {
      SweepRow row;
      row.snr_db = snr_db;
      row.lambda = sys.split.lambda;
      row.n_taps = sys.channel.n_taps;
      row.method = method_name(method);
      row.n_frames = n_frames;
      switch (method) {
        case Method::kLsCe:
          row.nmse = total.nmse_ls * inv_frames;
          row.ber = total.err_ls * inv_bits;
          break;
        case Method::kMmseCe:
          row.nmse = total.nmse_mmse * inv_frames;
          row.ber = total.err_mmse_zf * inv_bits;
          break;
        case Method::kCeNet:
          row.nmse = total.nmse_ce * inv_frames;
          row.ber = total.err_ce_zf * inv_bits;
          break;
        case Method::kMmseCeMmseSd:
          row.nmse = total.nmse_mmse * inv_frames;
          row.ber = total.err_mmse_sd * inv_bits;
          break;
        case Method::kCeNetZf:
          row.nmse = total.nmse_ce * inv_frames;
          row.ber = total.err_ce_zf * inv_bits;
          break;
        case Method::kProposed:
          row.nmse = total.nmse_ce * inv_frames;
          row.ber = total.err_fus * inv_bits;
          break;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<SweepRow> evaluate_sweep(
    const SystemConfig& base, const std::vector<Method>& methods,
    const std::vector<double>& snr_grid_db, const std::vector<double>& lambda_grid,
    const std::vector<int>& taps_grid, int n_frames, std::uint64_t seed, int workers,
    const std::function<CellModels(const SystemConfig&)>& provider) {
  if (lambda_grid.empty() || taps_grid.empty())
    throw std::invalid_argument("evaluate_sweep: empty cell grid");
  std::vector<SweepRow> rows;
  for (double lambda : lambda_grid) {
    for (int taps : taps_grid) {
      SystemConfig cell_sys = base;
      cell_sys.split.lambda = lambda;
      cell_sys.channel.n_taps = taps;
      cell_sys.validate();
      const CellModels cell = provider(cell_sys);
      auto cell_rows =
          evaluate_cell(cell_sys, cell, methods, snr_grid_db, n_frames, seed, workers);
      rows.insert(rows.end(), std::make_move_iterator(cell_rows.begin()),
                  std::make_move_iterator(cell_rows.end()));
    }
  }
  return rows;
}

}  // namespace rspnet::pipeline
