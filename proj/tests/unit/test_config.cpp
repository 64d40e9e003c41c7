#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "rspnet/config.hpp"

using namespace rspnet;
using namespace rspnet::cli;

TEST_CASE("defaults validate and serialize round-trips every field") {
  const ExperimentConfig cfg = default_config();
  CHECK_NOTHROW(cfg.validate());
  const std::string text = serialize_config(cfg);
  const ExperimentConfig back = parse_config_text(text, "roundtrip");
  CHECK(serialize_config(back) == text);
  CHECK(back.system.channel.n_subcarriers == cfg.system.channel.n_subcarriers);
  CHECK(back.system.split.lambda == cfg.system.split.lambda);
  CHECK(back.train.snr_grid_db == cfg.train.snr_grid_db);
  CHECK(back.sweep.lambda == cfg.sweep.lambda);
  CHECK(back.run.scale == cfg.run.scale);
}

TEST_CASE("parser applies overrides from each section") {
  const std::string text =
      "# comment\n"
      "[system]\n"
      "n_subcarriers = 16\n"
      "lambda = 0.2\n"
      "phase_mode = all-zero-phase\n"
      "ls_normalized = false\n"
      "[train]\n"
      "epochs_ce = 3\n"
      "snr_db = 0, 6, 12\n"
      "[sweep]\n"
      "taps = 3,5\n"
      "n_frames = 111\n"
      "[run]\n"
      "seed = 9\n"
      "scale = paper\n";
  const ExperimentConfig cfg = parse_config_text(text, "inline");
  CHECK(cfg.system.channel.n_subcarriers == 16);
  CHECK(cfg.system.split.lambda == 0.2);
  CHECK(cfg.system.phase_mode == channel::PhaseMode::kAllZeroPhase);
  CHECK_FALSE(cfg.system.ls_normalized);
  CHECK(cfg.train.epochs_ce == 3);
  CHECK(cfg.train.snr_grid_db == std::vector<double>{0.0, 6.0, 12.0});
  CHECK(cfg.sweep.taps == std::vector<int>{3, 5});
  CHECK(cfg.sweep.n_frames == 111);
  CHECK(cfg.run.seed == 9);
  CHECK(cfg.run.scale == "paper");
}

TEST_CASE("parser errors name the offending key and line") {
  auto message = [](const std::string& text) {
    try {
      parse_config_text(text, "inline");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("[system]\nbogus_key = 1\n").find("bogus_key") != std::string::npos);
  CHECK(message("[system]\nn_taps = 5\nn_taps = 7\n").find("duplicate") != std::string::npos);
  CHECK(message("[system]\nn_taps = banana\n").find("n_taps") != std::string::npos);
  CHECK(message("[nowhere]\nx = 1\n").find("nowhere") != std::string::npos);
  CHECK(message("n_taps = 5\n").find("section") != std::string::npos);
  CHECK(message("[system]\nn_taps 5\n").find(":2:") != std::string::npos);
}

TEST_CASE("validate rejects out-of-range settings") {
  ExperimentConfig cfg = default_config();
  cfg.system.split.lambda = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = default_config();
  cfg.sweep.taps = {99};  // exceeds the cyclic prefix
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = default_config();
  cfg.run.scale = "huge";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = default_config();
  cfg.run.bench_frames = 10;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = default_config();
  cfg.sweep.lambda = {0.1, 1.0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("paper scale widens the training corpus") {
  ExperimentConfig cfg = default_config();
  cfg.run.seed = 123;
  const pipeline::TrainConfig desk = cfg.effective_train();
  CHECK(desk.n_train == 20000);
  CHECK(desk.n_val == 4000);
  CHECK(desk.seed == 123);
  cfg.run.scale = "paper";
  const pipeline::TrainConfig paper = cfg.effective_train();
  CHECK(paper.n_train == 100000);
  CHECK(paper.n_val == 20000);
  CHECK(paper.epochs_ce == desk.epochs_ce);
}

TEST_CASE("config files load from disk and missing paths fail loudly") {
  const std::string path = "/tmp/rspnet_test_cfg.ini";
  {
    std::ofstream out(path);
    out << "[run]\nseed = 77\n";
  }
  const ExperimentConfig cfg = load_config_file(path);
  CHECK(cfg.run.seed == 77);
  std::remove(path.c_str());
  try {
    load_config_file("/tmp/rspnet_definitely_missing.ini");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/tmp/rspnet_definitely_missing.ini") != std::string::npos);
  }
}
