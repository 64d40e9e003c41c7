#include "rspnet/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rspnet {

std::uint64_t Rng::mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  return Rng(mix(seed) ^ mix(stream * 0xd1342543de82ef95ULL + 1));
}

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_int: bound must be nonzero");
  // rejection sampling, no modulo bias
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log1p(-u1));  // u1 < 1, so 1-u1 > 0
  const double t = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(t);
  has_cached_ = true;
  return r * std::cos(t);
}

std::complex<double> Rng::complex_normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-std::log1p(-u1));  // |z|^2 ~ Exp(1), mean 1
  const double t = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

std::uint64_t mix_stream(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t acc = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) {
    acc += 0x9e3779b97f4a7c15ULL;
    acc = (acc ^ p) * 0xff51afd7ed558ccdULL;
    acc ^= acc >> 33;
  }
  return acc;
}

}  // namespace rspnet
