#pragma once

#include <cstdint>
#include <random>

#include "gitnet/tensor.hpp"

namespace gitnet {

using Rng = std::mt19937_64;

/// splitmix64 finaliser; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the i-th sample of a generator run, so samples can be produced
/// in any order (or in parallel) with identical results.
constexpr std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(seed ^ index);
}

inline void fill_normal(Tensor& t, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : t.data()) v = normal(rng);
}

inline void fill_uniform(Tensor& t, double bound, Rng& rng) {
  std::uniform_real_distribution<double> uniform(-bound, bound);
  for (double& v : t.data()) v = uniform(rng);
}

inline Tensor normal_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  fill_normal(t, rng);
  return t;
}

}  // namespace gitnet
