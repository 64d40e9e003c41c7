#pragma once

#include <cstdint>
#include <vector>

#include "rspnet/pipeline.hpp"

namespace rspnet::analysis {

/// Closed-form per-frame cost of the two receiver chains, exact integers.
/// Proposed chain: 84 N^2. Classical chain (LMMSE estimate + MMSE symbol
/// detection with a fresh N x N solve): 6 N^3 + 4 N^2 + 2 N.
struct ComplexityRow {
  int n_subcarriers = 0;
  std::int64_t proposed = 0;
  std::int64_t mmse_chain = 0;
  double ratio = 0.0;  ///< mmse_chain / proposed
};

std::vector<ComplexityRow> complexity_table(const std::vector<int>& n_values);

/// Frame counts and per-symbol resources of a transmission schedule.
struct ResourceModel {
  std::int64_t n_data = 32;    ///< data symbols per block
  std::int64_t n_pilot = 32;   ///< dedicated pilot symbols the baseline spends
  double symbol_time = 1.0;    ///< T0
  double symbol_power = 1.0;   ///< P
  double lambda = 0.15;        ///< pilot share under superposition

  void validate() const;
};

/// Energy/bandwidth ledger comparing dedicated pilots against
/// superimposed pilots at equal data payload.
struct EnergyReport {
  double energy_baseline = 0.0;    ///< (n_data + n_pilot) * T0 * P
  double energy_superimposed = 0.0;
  double energy_saved = 0.0;
  double bandwidth_baseline = 0.0; ///< (n_data + n_pilot) * T0
  double bandwidth_superimposed = 0.0;
};

EnergyReport energy_accounting(const ResourceModel& m);

/// Wall-clock comparison of the two receiver chains on identical frames.
/// Times the median over `repetitions` passes of `n_frames` frames each;
/// the classical chain performs a fresh N x N LMMSE solve per frame, the
/// proposed chain runs both nets. Frame generation is excluded.
struct RuntimeBenchResult {
  double proposed_s = 0.0;    ///< seconds per pass over all frames
  double mmse_chain_s = 0.0;
  double ratio = 0.0;         ///< mmse_chain_s / proposed_s
  int n_frames = 0;
  int repetitions = 0;
};

RuntimeBenchResult runtime_bench(const pipeline::SystemConfig& sys,
                                 const pipeline::CellModels& cell, double snr_db,
                                 int n_frames, int repetitions, std::uint64_t seed);

}  // namespace rspnet::analysis
