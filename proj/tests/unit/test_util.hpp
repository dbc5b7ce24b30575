#pragma once

#include <cmath>

#include "gitnet/rng.hpp"
#include "gitnet/tensor.hpp"

namespace gitnet::test {

inline Tensor random_tensor(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  return normal_tensor(std::move(shape), rng);
}

// Naive triple loop, ascending reduction.
inline Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor c({a.rows(), b.cols()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < a.cols(); ++t) s += a(i, t) * b(t, j);
      c(i, j) = s;
    }
  return c;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

inline double rel_frobenius(const Tensor& a, const Tensor& b) {
  return frobenius_norm(a - b) / std::max(frobenius_norm(b), 1e-300);
}

}  // namespace gitnet::test
