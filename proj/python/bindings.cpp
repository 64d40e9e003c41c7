#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rspnet/analysis.hpp"
#include "rspnet/commands.hpp"

namespace py = pybind11;
using namespace rspnet;

PYBIND11_MODULE(_core, m) {
  m.doc() = "superimposed-pilot receiver simulation core";

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def_static("derive", &Rng::derive, py::arg("seed"), py::arg("stream"))
      .def("uniform", py::overload_cast<>(&Rng::uniform))
      .def("normal", &Rng::normal)
      .def("complex_normal", &Rng::complex_normal);

  py::enum_<channel::PhaseMode>(m, "PhaseMode")
      .value("ALL_ZERO_PHASE", channel::PhaseMode::kAllZeroPhase)
      .value("UNIFORM_RANDOM", channel::PhaseMode::kUniformRandom);

  py::class_<channel::ChannelConfig>(m, "ChannelConfig")
      .def(py::init<>())
      .def_readwrite("n_subcarriers", &channel::ChannelConfig::n_subcarriers)
      .def_readwrite("n_subsurfaces", &channel::ChannelConfig::n_subsurfaces)
      .def_readwrite("n_taps", &channel::ChannelConfig::n_taps)
      .def_readwrite("cp_length", &channel::ChannelConfig::cp_length)
      .def_readwrite("rician_k_db", &channel::ChannelConfig::rician_k_db)
      .def_readwrite("pdp_decay", &channel::ChannelConfig::pdp_decay)
      .def_readwrite("seed", &channel::ChannelConfig::seed)
      .def("validate", &channel::ChannelConfig::validate);

  py::class_<channel::ChannelRealization>(m, "ChannelRealization")
      .def_readonly("h_direct", &channel::ChannelRealization::h_direct)
      .def_readonly("phase_shifts", &channel::ChannelRealization::phase_shifts)
      .def_readonly("h_composite", &channel::ChannelRealization::h_composite);

  m.def("draw_tap_channel", &channel::draw_tap_channel, py::arg("cfg"), py::arg("rician"),
        py::arg("rng"));
  m.def("make_phase_shifts", &channel::make_phase_shifts, py::arg("n_subsurfaces"),
        py::arg("mode"), py::arg("rng"));
  m.def("compose_channel", &channel::compose_channel, py::arg("direct"), py::arg("tx_ris"),
        py::arg("ris_rx"), py::arg("phase_shifts"));
  m.def("draw_channel", &channel::draw_channel, py::arg("cfg"), py::arg("mode"),
        py::arg("rng"));

  py::class_<waveform::PowerSplit>(m, "PowerSplit")
      .def(py::init<>())
      .def_readwrite("lambda_", &waveform::PowerSplit::lambda)
      .def_readwrite("total_power", &waveform::PowerSplit::total_power)
      .def("pilot_power", &waveform::PowerSplit::pilot_power)
      .def("data_power", &waveform::PowerSplit::data_power);

  py::class_<waveform::Frame>(m, "Frame")
      .def_readonly("pilot", &waveform::Frame::pilot)
      .def_readonly("data_symbols", &waveform::Frame::data_symbols)
      .def_readonly("data_bits", &waveform::Frame::data_bits)
      .def_readonly("received", &waveform::Frame::received)
      .def_readonly("noise_var", &waveform::Frame::noise_var);

  m.def("zadoff_chu", &waveform::zadoff_chu, py::arg("n"), py::arg("root"));
  m.def("qpsk_modulate", &waveform::qpsk_modulate, py::arg("bits"));
  m.def("qpsk_demodulate", &waveform::qpsk_demodulate, py::arg("symbols"));
  m.def("snr_to_noise_var", &waveform::snr_to_noise_var, py::arg("snr_db"),
        py::arg("total_power"));
  m.def("transmit", &waveform::transmit, py::arg("pilot"), py::arg("data_symbols"),
        py::arg("split"), py::arg("channel_cfr"), py::arg("noise_var"), py::arg("rng"));
  m.def("random_frame", &waveform::random_frame, py::arg("pilot"), py::arg("split"),
        py::arg("channel_cfr"), py::arg("noise_var"), py::arg("rng"));

  py::class_<estimators::ZfResult>(m, "ZfResult")
      .def_readonly("s_zf", &estimators::ZfResult::s_zf)
      .def_readonly("erased", &estimators::ZfResult::erased);

  m.def("ls_estimate", &estimators::ls_estimate, py::arg("y"), py::arg("x_p"),
        py::arg("split"), py::arg("normalize_power") = true);
  m.def("lmmse_weights", &estimators::lmmse_weights, py::arg("channel_cov"), py::arg("split"),
        py::arg("noise_var"));
  m.def("lmmse_estimate", &estimators::lmmse_estimate, py::arg("y"), py::arg("x_p"),
        py::arg("split"), py::arg("channel_cov"), py::arg("noise_var"));
  m.def("zf_equalize", &estimators::zf_equalize, py::arg("y"), py::arg("h_est"));
  m.def("cancel_pilot", &estimators::cancel_pilot, py::arg("s_equalized"), py::arg("x_p"),
        py::arg("split"));
  m.def("wiener_equalize", &estimators::wiener_equalize, py::arg("y"), py::arg("h_est"),
        py::arg("split"), py::arg("noise_var"));
  m.def("mmse_detect", &estimators::mmse_detect, py::arg("y"), py::arg("h_est"),
        py::arg("x_p"), py::arg("split"), py::arg("noise_var"));
  m.def("estimate_channel_covariance", &estimators::estimate_channel_covariance,
        py::arg("cfg"), py::arg("mode"), py::arg("n_draws"), py::arg("rng"));

  m.def("complex_to_real", &models::complex_to_real, py::arg("v"));
  m.def("real_to_complex", &models::real_to_complex, py::arg("v"));
  m.def("splice_fus_input", &models::splice_fus_input, py::arg("s_coarse"), py::arg("y"));

  py::class_<models::CeNet>(m, "CeNet")
      .def_static("create", &models::CeNet::create, py::arg("n_subcarriers"), py::arg("l2"),
                  py::arg("rng"))
      .def_readonly("n_subcarriers", &models::CeNet::n_subcarriers)
      .def_readonly("trained", &models::CeNet::trained)
      .def("save", [](const models::CeNet& mdl, const std::string& path) { models::save(mdl, path); },
           py::arg("path"))
      .def_static("load", &models::load_ce, py::arg("path"));

  py::class_<models::FusNet>(m, "FusNet")
      .def_static("create", &models::FusNet::create, py::arg("n_subcarriers"), py::arg("l2"),
                  py::arg("rng"))
      .def_readonly("n_subcarriers", &models::FusNet::n_subcarriers)
      .def_readonly("trained", &models::FusNet::trained)
      .def("save", [](const models::FusNet& mdl, const std::string& path) { models::save(mdl, path); },
           py::arg("path"))
      .def_static("load", &models::load_fus, py::arg("path"));

  m.def("ce_net_infer", &models::ce_net_infer, py::arg("model"), py::arg("h_ls"));
  m.def("fus_net_infer", &models::fus_net_infer, py::arg("model"), py::arg("s_in"));

  py::class_<models::ComplexityCount>(m, "ComplexityCount")
      .def_readonly("weights", &models::ComplexityCount::weights)
      .def_readonly("weights_ex_bias", &models::ComplexityCount::weights_ex_bias)
      .def_readonly("flops", &models::ComplexityCount::flops)
      .def_readonly("reported_weights", &models::ComplexityCount::reported_weights)
      .def_readonly("reported_flops", &models::ComplexityCount::reported_flops)
      .def_readonly("reported_total", &models::ComplexityCount::reported_total);
  m.def("count_params_flops", &models::count_params_flops, py::arg("ce"), py::arg("fus"));

  py::class_<pipeline::SystemConfig>(m, "SystemConfig")
      .def(py::init<>())
      .def_readwrite("channel", &pipeline::SystemConfig::channel)
      .def_readwrite("split", &pipeline::SystemConfig::split)
      .def_readwrite("zc_root", &pipeline::SystemConfig::zc_root)
      .def_readwrite("phase_mode", &pipeline::SystemConfig::phase_mode)
      .def_readwrite("ls_normalized", &pipeline::SystemConfig::ls_normalized)
      .def("pilot", &pipeline::SystemConfig::pilot);

  py::class_<pipeline::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("n_train", &pipeline::TrainConfig::n_train)
      .def_readwrite("n_val", &pipeline::TrainConfig::n_val)
      .def_readwrite("batch", &pipeline::TrainConfig::batch)
      .def_readwrite("epochs_ce", &pipeline::TrainConfig::epochs_ce)
      .def_readwrite("epochs_fus", &pipeline::TrainConfig::epochs_fus)
      .def_readwrite("lr", &pipeline::TrainConfig::lr)
      .def_readwrite("l2_ce", &pipeline::TrainConfig::l2_ce)
      .def_readwrite("l2_fus", &pipeline::TrainConfig::l2_fus)
      .def_readwrite("snr_grid_db", &pipeline::TrainConfig::snr_grid_db)
      .def_readwrite("seed", &pipeline::TrainConfig::seed);

  py::class_<pipeline::Dataset>(m, "Dataset")
      .def_readonly("inputs", &pipeline::Dataset::inputs)
      .def_readonly("labels", &pipeline::Dataset::labels)
      .def("rows", &pipeline::Dataset::rows);

  py::class_<pipeline::LossHistory>(m, "LossHistory")
      .def_readonly("train_loss", &pipeline::LossHistory::train_loss)
      .def_readonly("val_loss", &pipeline::LossHistory::val_loss);

  m.def("nmse", &pipeline::nmse, py::arg("h_hat"), py::arg("h_true"));
  m.def("ber", &pipeline::ber, py::arg("detected"), py::arg("sent"));
  m.def("gen_ce_dataset", &pipeline::gen_ce_dataset, py::arg("tc"), py::arg("sys"),
        py::arg("count"), py::arg("stream_kind"), py::arg("workers") = 1);
  m.def("gen_fus_dataset", &pipeline::gen_fus_dataset, py::arg("tc"), py::arg("ce"),
        py::arg("sys"), py::arg("count"), py::arg("stream_kind"), py::arg("workers") = 1);
  m.def("train_ce_net", &pipeline::train_ce_net, py::arg("model"), py::arg("train_set"),
        py::arg("val_set"), py::arg("tc"));
  m.def("train_fus_net", &pipeline::train_fus_net, py::arg("model"), py::arg("train_set"),
        py::arg("val_set"), py::arg("tc"));

  py::class_<pipeline::TestPhaseResult>(m, "TestPhaseResult")
      .def_readonly("h_ls", &pipeline::TestPhaseResult::h_ls)
      .def_readonly("h_ce", &pipeline::TestPhaseResult::h_ce)
      .def_readonly("s_coarse", &pipeline::TestPhaseResult::s_coarse)
      .def_readonly("s_fus", &pipeline::TestPhaseResult::s_fus)
      .def_readonly("detected_bits", &pipeline::TestPhaseResult::detected_bits);

  m.def(
      "run_test_phase",
      [](const models::CeNet& ce, const models::FusNet& fus, const waveform::Frame& frame,
         bool ls_normalized) {
        std::vector<std::string> trace;
        auto result = pipeline::run_test_phase(ce, fus, frame, ls_normalized, &trace);
        return py::make_tuple(std::move(result), std::move(trace));
      },
      py::arg("ce"), py::arg("fus"), py::arg("frame"), py::arg("ls_normalized") = true,
      "returns (result, stage_trace)");

  py::class_<pipeline::SweepRow>(m, "SweepRow")
      .def_readonly("snr_db", &pipeline::SweepRow::snr_db)
      .def_readonly("lambda_", &pipeline::SweepRow::lambda)
      .def_readonly("n_taps", &pipeline::SweepRow::n_taps)
      .def_readonly("method", &pipeline::SweepRow::method)
      .def_readonly("nmse", &pipeline::SweepRow::nmse)
      .def_readonly("ber", &pipeline::SweepRow::ber)
      .def_readonly("n_frames", &pipeline::SweepRow::n_frames)
      .def("__repr__", [](const pipeline::SweepRow& r) {
        return "SweepRow(" + r.method + ", snr=" + std::to_string(r.snr_db) +
               ", nmse=" + std::to_string(r.nmse) + ", ber=" + std::to_string(r.ber) + ")";
      });

  py::class_<pipeline::CellModels>(m, "CellModels")
      .def(py::init([](models::CeNet ce, models::FusNet fus, Eigen::MatrixXcd cov) {
             pipeline::CellModels c;
             c.ce = std::move(ce);
             c.fus = std::move(fus);
             c.channel_cov = std::move(cov);
             return c;
           }),
           py::arg("ce"), py::arg("fus"), py::arg("channel_cov"));

  m.def(
      "evaluate_cell",
      [](const pipeline::SystemConfig& sys, const pipeline::CellModels& cell,
         const std::vector<double>& snr_grid_db, int n_frames, std::uint64_t seed,
         int workers) {
        return pipeline::evaluate_cell(sys, cell, pipeline::all_methods(), snr_grid_db,
                                       n_frames, seed, workers);
      },
      py::arg("sys"), py::arg("cell"), py::arg("snr_grid_db"), py::arg("n_frames"),
      py::arg("seed"), py::arg("workers") = 1);

  py::class_<analysis::ComplexityRow>(m, "ComplexityRow")
      .def_readonly("n_subcarriers", &analysis::ComplexityRow::n_subcarriers)
      .def_readonly("proposed", &analysis::ComplexityRow::proposed)
      .def_readonly("mmse_chain", &analysis::ComplexityRow::mmse_chain)
      .def_readonly("ratio", &analysis::ComplexityRow::ratio);
  m.def("complexity_table", &analysis::complexity_table, py::arg("n_values"));

  py::class_<analysis::ResourceModel>(m, "ResourceModel")
      .def(py::init<>())
      .def_readwrite("n_data", &analysis::ResourceModel::n_data)
      .def_readwrite("n_pilot", &analysis::ResourceModel::n_pilot)
      .def_readwrite("symbol_time", &analysis::ResourceModel::symbol_time)
      .def_readwrite("symbol_power", &analysis::ResourceModel::symbol_power)
      .def_readwrite("lambda_", &analysis::ResourceModel::lambda);

  py::class_<analysis::EnergyReport>(m, "EnergyReport")
      .def_readonly("energy_baseline", &analysis::EnergyReport::energy_baseline)
      .def_readonly("energy_superimposed", &analysis::EnergyReport::energy_superimposed)
      .def_readonly("energy_saved", &analysis::EnergyReport::energy_saved)
      .def_readonly("bandwidth_baseline", &analysis::EnergyReport::bandwidth_baseline)
      .def_readonly("bandwidth_superimposed", &analysis::EnergyReport::bandwidth_superimposed);
  m.def("energy_accounting", &analysis::energy_accounting, py::arg("model"));
}
