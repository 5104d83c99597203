#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace ahtlab {

using Rng = std::mt19937_64;

/// Uniform variate in [0, 1) built from the top 53 bits of one draw, so the
/// stream is identical across standard library implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n). Uses a single draw; the modulo bias is below
/// 2^-50 for the tiny n used here.
inline std::size_t uniform_index(std::size_t n, Rng& rng) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

/// Inverse-CDF draw from a discrete distribution. Mass lost to rounding is
/// assigned to the last index with positive probability.
inline std::size_t sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    last_positive = k;
    cumulative += probs[k];
    if (u < cumulative) return k;
  }
  return last_positive;
}

/// splitmix64 finalizer; maps (master seed, stream index) to an independent
/// stream seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace ahtlab
