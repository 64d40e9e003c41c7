#include "rspnet/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rspnet::cli {

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

void ExperimentConfig::validate() const {
  try {
    system.validate();
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (sweep.snr_db.empty()) throw ConfigError("config: sweep snr grid must be non-empty");
  if (sweep.lambda.empty()) throw ConfigError("config: sweep lambda grid must be non-empty");
  if (sweep.taps.empty()) throw ConfigError("config: sweep taps grid must be non-empty");
  for (double l : sweep.lambda)
    if (!(l > 0.0 && l < 1.0))
      throw ConfigError("config: sweep lambda values must be in (0, 1)");
  for (int t : sweep.taps) {
    if (t <= 0) throw ConfigError("config: sweep taps values must be positive");
    if (t > system.channel.cp_length)
      throw ConfigError("config: sweep taps values must not exceed cp_length");
  }
  if (sweep.n_frames < 1) throw ConfigError("config: sweep n_frames must be >= 1");
  if (run.scale != "desk" && run.scale != "paper")
    throw ConfigError("config: run scale must be 'desk' or 'paper'");
  if (run.workers < 1) throw ConfigError("config: run workers must be >= 1");
  if (run.calibration_draws < 1)
    throw ConfigError("config: run calibration_draws must be >= 1");
  if (run.bench_frames < 100) throw ConfigError("config: run bench_frames must be >= 100");
  if (run.bench_repetitions < 1)
    throw ConfigError("config: run bench_repetitions must be >= 1");
  if (run.out_dir.empty()) throw ConfigError("config: run out_dir must be non-empty");
}

pipeline::TrainConfig ExperimentConfig::effective_train() const {
  pipeline::TrainConfig tc = train;
  tc.seed = run.seed;
  if (run.scale == "paper") {
    tc.n_train = 100000;
    tc.n_val = 20000;
  }
  return tc;
}

ExperimentConfig default_config() { return {}; }

namespace {

class Parser {
 public:
  Parser(const std::string& text, const std::string& source) : source_(source) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(line_no, "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) fail(line_no, "empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail(line_no, "empty key");
      if (section.empty()) fail(line_no, "key '" + key + "' appears before any section");
      const std::string full = section + "." + key;
      if (entries_.count(full)) fail(line_no, "duplicate key '" + full + "'");
      entries_[full] = {value, line_no};
    }
  }

  template <typename T, typename F>
  void take(const std::string& full_key, T& target, F&& convert) {
    const auto it = entries_.find(full_key);
    if (it == entries_.end()) return;  // absent keys keep their defaults
    try {
      target = convert(it->second.value, it->second.line);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " for key '" + full_key + "'");
    }
    consumed_.insert(full_key);
  }

  void finish() const {
    for (const auto& [key, entry] : entries_)
      if (!consumed_.count(key))
        fail(entry.line, "unknown key '" + key + "'");
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  double to_double(const std::string& v, int line) const {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
      fail(line, "expected a finite number, got '" + v + "'");
    return out;
  }

  long long to_int(const std::string& v, int line) const {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
      fail(line, "expected an integer, got '" + v + "'");
    return out;
  }

  std::uint64_t to_u64(const std::string& v, int line) const {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
      fail(line, "expected an unsigned integer, got '" + v + "'");
    return out;
  }

  bool to_bool(const std::string& v, int line) const {
    if (v == "true") return true;
    if (v == "false") return false;
    fail(line, "expected 'true' or 'false', got '" + v + "'");
  }

  std::vector<std::string> split_list(const std::string& v, int line) const {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(v);
    while (std::getline(in, cur, ',')) {
      cur = trim(cur);
      if (cur.empty()) fail(line, "empty list element");
      parts.push_back(cur);
    }
    if (parts.empty()) fail(line, "expected a comma-separated list");
    return parts;
  }

  static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
  }

 private:
  struct Entry {
    std::string value;
    int line;
  };
  std::string source_;
  std::map<std::string, Entry> entries_;
  std::set<std::string> consumed_;
};

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& source_name) {
  Parser p(text, source_name);
  ExperimentConfig cfg;

  auto as_double = [&](const std::string& v, int line) { return p.to_double(v, line); };
  auto as_int = [&](const std::string& v, int line) { return static_cast<int>(p.to_int(v, line)); };
  auto as_u64 = [&](const std::string& v, int line) { return p.to_u64(v, line); };
  auto as_bool = [&](const std::string& v, int line) { return p.to_bool(v, line); };
  auto as_string = [&](const std::string& v, int) { return v; };
  auto as_double_list = [&](const std::string& v, int line) {
    std::vector<double> out;
    for (const auto& part : p.split_list(v, line)) out.push_back(p.to_double(part, line));
    return out;
  };
  auto as_int_list = [&](const std::string& v, int line) {
    std::vector<int> out;
    for (const auto& part : p.split_list(v, line))
      out.push_back(static_cast<int>(p.to_int(part, line)));
    return out;
  };
  auto as_phase_mode = [&](const std::string& v, int line) {
    if (v == "uniform-random") return channel::PhaseMode::kUniformRandom;
    if (v == "all-zero-phase") return channel::PhaseMode::kAllZeroPhase;
    p.fail(line, "phase_mode must be 'uniform-random' or 'all-zero-phase'");
  };

  p.take("system.n_subcarriers", cfg.system.channel.n_subcarriers, as_int);
  p.take("system.n_subsurfaces", cfg.system.channel.n_subsurfaces, as_int);
  p.take("system.n_taps", cfg.system.channel.n_taps, as_int);
  p.take("system.cp_length", cfg.system.channel.cp_length, as_int);
  p.take("system.rician_k_db", cfg.system.channel.rician_k_db, as_double);
  p.take("system.pdp_decay", cfg.system.channel.pdp_decay, as_double);
  p.take("system.channel_seed", cfg.system.channel.seed, as_u64);
  p.take("system.lambda", cfg.system.split.lambda, as_double);
  p.take("system.total_power", cfg.system.split.total_power, as_double);
  p.take("system.zc_root", cfg.system.zc_root, as_int);
  p.take("system.phase_mode", cfg.system.phase_mode, as_phase_mode);
  p.take("system.ls_normalized", cfg.system.ls_normalized, as_bool);

  p.take("train.n_train", cfg.train.n_train, as_int);
  p.take("train.n_val", cfg.train.n_val, as_int);
  p.take("train.batch", cfg.train.batch, as_int);
  p.take("train.epochs_ce", cfg.train.epochs_ce, as_int);
  p.take("train.epochs_fus", cfg.train.epochs_fus, as_int);
  p.take("train.lr", cfg.train.lr, as_double);
  p.take("train.l2_ce", cfg.train.l2_ce, as_double);
  p.take("train.l2_fus", cfg.train.l2_fus, as_double);
  p.take("train.snr_db", cfg.train.snr_grid_db, as_double_list);

  p.take("sweep.snr_db", cfg.sweep.snr_db, as_double_list);
  p.take("sweep.lambda", cfg.sweep.lambda, as_double_list);
  p.take("sweep.taps", cfg.sweep.taps, as_int_list);
  p.take("sweep.n_frames", cfg.sweep.n_frames, as_int);

  p.take("run.seed", cfg.run.seed, as_u64);
  p.take("run.out_dir", cfg.run.out_dir, as_string);
  p.take("run.scale", cfg.run.scale, as_string);
  p.take("run.workers", cfg.run.workers, as_int);
  p.take("run.calibration_draws", cfg.run.calibration_draws, as_int);
  p.take("run.bench_frames", cfg.run.bench_frames, as_int);
  p.take("run.bench_repetitions", cfg.run.bench_repetitions, as_int);
  p.take("run.bench_snr_db", cfg.run.bench_snr_db, as_double);

  p.finish();
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto join_doubles = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
  };
  auto join_ints = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };

  out << "[system]\n";
  out << "n_subcarriers = " << cfg.system.channel.n_subcarriers << "\n";
  out << "n_subsurfaces = " << cfg.system.channel.n_subsurfaces << "\n";
  out << "n_taps = " << cfg.system.channel.n_taps << "\n";
  out << "cp_length = " << cfg.system.channel.cp_length << "\n";
  out << "rician_k_db = " << format_double(cfg.system.channel.rician_k_db) << "\n";
  out << "pdp_decay = " << format_double(cfg.system.channel.pdp_decay) << "\n";
  out << "channel_seed = " << cfg.system.channel.seed << "\n";
  out << "lambda = " << format_double(cfg.system.split.lambda) << "\n";
  out << "total_power = " << format_double(cfg.system.split.total_power) << "\n";
  out << "zc_root = " << cfg.system.zc_root << "\n";
  out << "phase_mode = "
      << (cfg.system.phase_mode == channel::PhaseMode::kUniformRandom ? "uniform-random"
                                                                      : "all-zero-phase")
      << "\n";
  out << "ls_normalized = " << (cfg.system.ls_normalized ? "true" : "false") << "\n";

  out << "\n[train]\n";
  out << "n_train = " << cfg.train.n_train << "\n";
  out << "n_val = " << cfg.train.n_val << "\n";
  out << "batch = " << cfg.train.batch << "\n";
  out << "epochs_ce = " << cfg.train.epochs_ce << "\n";
  out << "epochs_fus = " << cfg.train.epochs_fus << "\n";
  out << "lr = " << format_double(cfg.train.lr) << "\n";
  out << "l2_ce = " << format_double(cfg.train.l2_ce) << "\n";
  out << "l2_fus = " << format_double(cfg.train.l2_fus) << "\n";
  out << "snr_db = " << join_doubles(cfg.train.snr_grid_db) << "\n";

  out << "\n[sweep]\n";
  out << "snr_db = " << join_doubles(cfg.sweep.snr_db) << "\n";
  out << "lambda = " << join_doubles(cfg.sweep.lambda) << "\n";
  out << "taps = " << join_ints(cfg.sweep.taps) << "\n";
  out << "n_frames = " << cfg.sweep.n_frames << "\n";

  out << "\n[run]\n";
  out << "seed = " << cfg.run.seed << "\n";
  out << "out_dir = " << cfg.run.out_dir << "\n";
  out << "scale = " << cfg.run.scale << "\n";
  out << "workers = " << cfg.run.workers << "\n";
  out << "calibration_draws = " << cfg.run.calibration_draws << "\n";
  out << "bench_frames = " << cfg.run.bench_frames << "\n";
  out << "bench_repetitions = " << cfg.run.bench_repetitions << "\n";
  out << "bench_snr_db = " << format_double(cfg.run.bench_snr_db) << "\n";
  return out.str();
}

}  // namespace rspnet::cli
