#pragma once

#include <cstddef>
#include <cstdint>

#include "gitnet/tensor.hpp"

namespace gitnet {

/// Thin singular value decomposition M = U·diag(S)·Vt.
///
/// For M[m×n] with r = min(m, n) (or the requested rank for the randomized
/// variant): U is [m×r] with orthonormal columns, S is [r] nonincreasing and
/// nonnegative, Vt is [r×n] with orthonormal rows.
struct Svd {
  Tensor u;
  Tensor s;
  Tensor vt;
};

/// Thin QR factorisation by Householder reflections: A[m×n] = Q·R with m ≥ n,
/// Q[m×n] orthonormal columns and R[n×n] upper triangular.
struct Qr {
  Tensor q;
  Tensor r;
};

Qr householder_qr(const Tensor& a);

/// Largest m·n accepted by dense_svd.
inline constexpr std::size_t kDenseSvdMaxEntries = 4'000'000;

/// Exact (to working precision) SVD by one-sided Jacobi rotations, with a
/// Householder QR pass first when the matrix is tall.
Svd dense_svd(const Tensor& m);

struct RandomizedSvdOptions {
  std::size_t oversample = 10;
  std::size_t power_iters = 2;
  std::uint64_t seed = 0;
};

/// Rank-`rank` SVD from a Gaussian range finder with power iterations.
///
/// The sketch width is rank + oversample, clamped to min(m, n). Output is a
/// deterministic function of the input and the seed.
Svd randomized_svd(const Tensor& m, std::size_t rank, const RandomizedSvdOptions& options = {});

/// Reconstructs U·diag(S)·Vt.
Tensor svd_reconstruct(const Svd& svd);

}  // namespace gitnet
