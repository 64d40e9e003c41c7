#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace rspnet {

/// Deterministic random stream: a seeded mt19937_64 with explicit
/// Box-Muller normals, so draws never depend on libstdc++ distribution
/// internals. Every worker/sample owns its own stream (see derive()).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix(seed)) {}

  /// Child stream for a (seed, stream) pair. Used to give each sample,
  /// frame and training run an independent generator, so results do not
  /// depend on how work is split across workers.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, bound). bound must be nonzero.
  std::uint64_t uniform_int(std::uint64_t bound);

  /// Standard normal, Box-Muller (second value of each pair is cached).
  double normal();

  /// Circularly symmetric complex normal with E|z|^2 = 1.
  std::complex<double> complex_normal();

 private:
  static std::uint64_t mix(std::uint64_t x);

  std::mt19937_64 gen_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// Collapses a list of identifiers (kind, cell, index, ...) into one
/// stream id for Rng::derive.
std::uint64_t mix_stream(std::initializer_list<std::uint64_t> parts);

}  // namespace rspnet
