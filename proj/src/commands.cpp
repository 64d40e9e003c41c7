#include "rspnet/commands.hpp"

#include <bit>
#include <filesystem>
#include <fstream>
#include <functional>

namespace rspnet::cli {

namespace fs = std::filesystem;

ExperimentConfig resolve_config(const std::string& config_path, const CliOverrides& ov) {
  ExperimentConfig cfg =
      config_path.empty() ? default_config() : load_config_file(config_path);
  if (ov.seed) cfg.run.seed = *ov.seed;
  if (ov.out_dir) cfg.run.out_dir = *ov.out_dir;
  if (ov.scale) cfg.run.scale = *ov.scale;
  if (ov.workers) cfg.run.workers = *ov.workers;
  if (ov.epochs_ce) cfg.train.epochs_ce = *ov.epochs_ce;
  if (ov.epochs_fus) cfg.train.epochs_fus = *ov.epochs_fus;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

std::string cell_suffix(const ExperimentConfig& cfg, double lambda, int taps) {
  if (cfg.sweep.lambda.size() == 1 && cfg.sweep.taps.size() == 1) return "";
  return "_lam" + format_double(lambda) + "_L" + std::to_string(taps);
}

pipeline::SystemConfig cell_system(const ExperimentConfig& cfg, double lambda, int taps) {
  pipeline::SystemConfig sys = cfg.system;
  sys.split.lambda = lambda;
  sys.channel.n_taps = taps;
  sys.validate();
  return sys;
}

Eigen::MatrixXcd cell_covariance(const ExperimentConfig& cfg,
                                 const pipeline::SystemConfig& sys) {
  Rng rng = Rng::derive(cfg.run.seed,
                        mix_stream({pipeline::stream::kCalibration, sys.channel.seed,
                                    static_cast<std::uint64_t>(sys.channel.n_taps)}));
  return estimators::estimate_channel_covariance(sys.channel, sys.phase_mode,
                                                 cfg.run.calibration_draws, rng);
}

CellArtifacts train_cell(const ExperimentConfig& cfg, const pipeline::SystemConfig& sys,
                         std::ostream* log) {
  const pipeline::TrainConfig tc = cfg.effective_train();
  const int n = sys.channel.n_subcarriers;
  const int workers = cfg.run.workers;
  const std::uint64_t lam_bits = std::bit_cast<std::uint64_t>(sys.split.lambda);
  const auto taps = static_cast<std::uint64_t>(sys.channel.n_taps);

  CellArtifacts art;
  {
    Rng init = Rng::derive(tc.seed, mix_stream({pipeline::stream::kInitCe, lam_bits, taps}));
    art.ce = models::CeNet::create(n, tc.l2_ce, init);
  }
  if (log)
    *log << "[train] lambda=" << format_double(sys.split.lambda)
         << " L=" << sys.channel.n_taps << ": generating " << tc.n_train << "+" << tc.n_val
         << " channel-estimation samples\n";
  const pipeline::Dataset ce_train =
      pipeline::gen_ce_dataset(tc, sys, tc.n_train, pipeline::stream::kCeTrain, workers);
  const pipeline::Dataset ce_val =
      pipeline::gen_ce_dataset(tc, sys, tc.n_val, pipeline::stream::kCeVal, workers);
  art.ce_history = pipeline::train_ce_net(art.ce, ce_train, ce_val, tc);
  if (log)
    *log << "[train]   ce-net val loss " << format_double(art.ce_history.val_loss.front())
         << " -> " << format_double(art.ce_history.val_loss.back()) << " over "
         << tc.epochs_ce << " epochs\n";

  {
    Rng init = Rng::derive(tc.seed, mix_stream({pipeline::stream::kInitFus, lam_bits, taps}));
    art.fus = models::FusNet::create(n, tc.l2_fus, init);
  }
  const pipeline::Dataset fus_train = pipeline::gen_fus_dataset(
      tc, art.ce, sys, tc.n_train, pipeline::stream::kFusTrain, workers);
  const pipeline::Dataset fus_val =
      pipeline::gen_fus_dataset(tc, art.ce, sys, tc.n_val, pipeline::stream::kFusVal, workers);
  art.fus_history = pipeline::train_fus_net(art.fus, fus_train, fus_val, tc);
  if (log)
    *log << "[train]   fus-net val loss " << format_double(art.fus_history.val_loss.front())
         << " -> " << format_double(art.fus_history.val_loss.back()) << " over "
         << tc.epochs_fus << " epochs\n";
  return art;
}

pipeline::CellModels load_cell(const ExperimentConfig& cfg, double lambda, int taps) {
  const std::string suffix = cell_suffix(cfg, lambda, taps);
  const fs::path dir(cfg.run.out_dir);
  const fs::path ce_path = dir / ("ce_net" + suffix + ".ckpt");
  const fs::path fus_path = dir / ("fus_net" + suffix + ".ckpt");
  if (!fs::exists(ce_path) || !fs::exists(fus_path))
    throw ConfigError("missing checkpoint '" + ce_path.string() + "' or '" +
                      fus_path.string() + "'; run the train command first");
  pipeline::CellModels cell;
  cell.ce = models::load_ce(ce_path.string());
  cell.fus = models::load_fus(fus_path.string());
  const pipeline::SystemConfig sys = cell_system(cfg, lambda, taps);
  if (cell.ce.n_subcarriers != sys.channel.n_subcarriers)
    throw ConfigError("checkpoint '" + ce_path.string() + "' was trained for N=" +
                      std::to_string(cell.ce.n_subcarriers) + ", config asks for N=" +
                      std::to_string(sys.channel.n_subcarriers));
  cell.channel_cov = cell_covariance(cfg, sys);
  return cell;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

}  // namespace

void write_loss_csv(const pipeline::LossHistory& hist, const std::string& path) {
  auto out = open_out(path);
  out << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < hist.train_loss.size(); ++e)
    out << e << "," << format_double(hist.train_loss[e]) << ","
        << format_double(hist.val_loss[e]) << "\n";
}

void write_results_csv(const std::vector<pipeline::SweepRow>& rows, const std::string& path) {
  auto out = open_out(path);
  out << "snr_db,lambda,L,method,nmse,ber,n_frames\n";
  for (const auto& r : rows)
    out << format_double(r.snr_db) << "," << format_double(r.lambda) << "," << r.n_taps
        << "," << r.method << "," << format_double(r.nmse) << "," << format_double(r.ber)
        << "," << r.n_frames << "\n";
}

namespace {

int guard(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int cmd_train(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guard(err, [&] {
    fs::create_directories(cfg.run.out_dir);
    const fs::path dir(cfg.run.out_dir);
    {
      auto snapshot = open_out((dir / "config.ini").string());
      snapshot << serialize_config(cfg);
    }
    for (double lambda : cfg.sweep.lambda) {
      for (int taps : cfg.sweep.taps) {
        const pipeline::SystemConfig sys = cell_system(cfg, lambda, taps);
        const CellArtifacts art = train_cell(cfg, sys, &out);
        const std::string suffix = cell_suffix(cfg, lambda, taps);
        models::save(art.ce, (dir / ("ce_net" + suffix + ".ckpt")).string());
        models::save(art.fus, (dir / ("fus_net" + suffix + ".ckpt")).string());
        write_loss_csv(art.ce_history, (dir / ("loss_ce" + suffix + ".csv")).string());
        write_loss_csv(art.fus_history, (dir / ("loss_fus" + suffix + ".csv")).string());
      }
    }
    out << "[train] wrote checkpoints and loss curves to " << cfg.run.out_dir << "\n";
    return 0;
  });
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guard(err, [&] {
    fs::create_directories(cfg.run.out_dir);
    auto provider = [&](const pipeline::SystemConfig& sys) {
      return load_cell(cfg, sys.split.lambda, sys.channel.n_taps);
    };
    out << "[sweep] " << cfg.sweep.lambda.size() * cfg.sweep.taps.size() << " cells x "
        << cfg.sweep.snr_db.size() << " SNR points x " << cfg.sweep.n_frames << " frames\n";
    const auto rows = pipeline::evaluate_sweep(
        cfg.system, pipeline::all_methods(), cfg.sweep.snr_db, cfg.sweep.lambda,
        cfg.sweep.taps, cfg.sweep.n_frames, cfg.run.seed, cfg.run.workers, provider);
    const std::string path = (fs::path(cfg.run.out_dir) / "results.csv").string();
    write_results_csv(rows, path);
    out << "[sweep] wrote " << rows.size() << " rows to " << path << "\n";
    return 0;
  });
}

int cmd_analyze(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guard(err, [&] {
    fs::create_directories(cfg.run.out_dir);
    const fs::path dir(cfg.run.out_dir);

    {
      const auto rows = analysis::complexity_table({8, 16, 32, 64, 128, 256});
      auto csv = open_out((dir / "complexity.csv").string());
      csv << "n,proposed_flops,mmse_flops,ratio\n";
      for (const auto& r : rows)
        csv << r.n_subcarriers << "," << r.proposed << "," << r.mmse_chain << ","
            << format_double(r.ratio) << "\n";
    }

    {
      analysis::ResourceModel m;
      m.n_data = cfg.system.channel.n_subcarriers;
      m.n_pilot = cfg.system.channel.n_subcarriers;
      m.symbol_time = 1.0;
      m.symbol_power = cfg.system.split.total_power;
      m.lambda = cfg.system.split.lambda;
      const auto rep = analysis::energy_accounting(m);
      auto csv = open_out((dir / "energy.csv").string());
      csv << "n_data,n_pilot,lambda,energy_baseline,energy_superimposed,energy_saved,"
             "bandwidth_baseline,bandwidth_superimposed\n";
      csv << m.n_data << "," << m.n_pilot << "," << format_double(m.lambda) << ","
          << format_double(rep.energy_baseline) << ","
          << format_double(rep.energy_superimposed) << ","
          << format_double(rep.energy_saved) << "," << format_double(rep.bandwidth_baseline)
          << "," << format_double(rep.bandwidth_superimposed) << "\n";
    }

    {
      const double lambda = cfg.sweep.lambda.front();
      const int taps = cfg.sweep.taps.front();
      const pipeline::CellModels cell = load_cell(cfg, lambda, taps);
      const pipeline::SystemConfig sys = cell_system(cfg, lambda, taps);
      const auto bench =
          analysis::runtime_bench(sys, cell, cfg.run.bench_snr_db, cfg.run.bench_frames,
                                  cfg.run.bench_repetitions, cfg.run.seed);
      auto csv = open_out((dir / "runtime.csv").string());
      csv << "n_frames,repetitions,proposed_s,mmse_chain_s,ratio\n";
      csv << bench.n_frames << "," << bench.repetitions << ","
          << format_double(bench.proposed_s) << "," << format_double(bench.mmse_chain_s)
          << "," << format_double(bench.ratio) << "\n";
      out << "[analyze] runtime ratio mmse/proposed = " << format_double(bench.ratio)
          << " over " << bench.n_frames << " frames\n";
    }

    out << "[analyze] wrote complexity.csv, energy.csv, runtime.csv to " << cfg.run.out_dir
        << "\n";
    return 0;
  });
}

}  // namespace rspnet::cli
