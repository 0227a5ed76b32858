#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace pdcspeckle {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer; decorrelates the sub-streams derived from one frame seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for sub-stream `stream` of `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return mix_seed(mix_seed(base) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// Circular complex Gaussian with E|z|^2 = variance.
inline std::complex<double> complex_gaussian(Engine& rng, double variance) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

}  // namespace pdcspeckle
