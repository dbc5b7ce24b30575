#include "gitnet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gitnet/rng.hpp"

namespace gitnet {

namespace {

constexpr int kMaxJacobiSweeps = 80;

void axpy_span(double s, std::span<const double> x, std::span<double> y) noexcept {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

// Rows of `out` that are exactly zero are replaced by unit vectors orthogonal
// to every other row (two passes of Gram-Schmidt against the standard basis).
void complete_orthonormal_rows(Tensor& rows, const std::vector<bool>& missing) {
  const std::size_t r = rows.rows(), n = rows.cols();
  std::size_t candidate = 0;
  for (std::size_t i = 0; i < r; ++i) {
    if (!missing[i]) continue;
    std::span<double> row(rows.raw() + i * n, n);
    for (; candidate < n; ++candidate) {
      std::fill(row.begin(), row.end(), 0.0);
      row[candidate] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t j = 0; j < r; ++j) {
          if (j == i || (missing[j] && j > i)) continue;
          std::span<const double> other(rows.raw() + j * n, n);
          axpy_span(-dot(other, row), other, row);
        }
      }
      const double norm = std::sqrt(dot(row, row));
      if (norm > 0.5) {
        for (double& v : row) v /= norm;
        ++candidate;
        break;
      }
    }
  }
}

// One-sided Jacobi on the rows of `w` (the columns of the matrix being
// decomposed). On return the rows of `w` are mutually orthogonal and the rows
// of `v` hold the accumulated rotations.
void jacobi_orthogonalize(Tensor& w, Tensor& v) {
  const std::size_t n = w.rows(), m = w.cols();
  const double tol = static_cast<double>(std::max<std::size_t>(m, 1)) * std::numeric_limits<double>::epsilon();
  std::vector<double> norms(n);
  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      std::span<const double> row(w.raw() + i * m, m);
      norms[i] = dot(row, row);
    }
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = norms[p], beta = norms[q];
        if (alpha == 0.0 || beta == 0.0) continue;
        double* wp = w.raw() + p * m;
        double* wq = w.raw() + q * m;
        const double gamma = dot({wp, m}, {wq, m});
        if (std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = wp[i], y = wq[i];
          wp[i] = c * x - s * y;
          wq[i] = s * x + c * y;
        }
        double* vp = v.raw() + p * v.cols();
        double* vq = v.raw() + q * v.cols();
        for (std::size_t i = 0; i < v.cols(); ++i) {
          const double x = vp[i], y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
        norms[p] = alpha - t * gamma;
        norms[q] = beta + t * gamma;
      }
    }
    if (!rotated) return;
  }
  throw NumericError("dense_svd: Jacobi iteration did not converge in " + std::to_string(kMaxJacobiSweeps) +
                     " sweeps");
}

// SVD of a matrix with at least as many rows as columns, given as its
// transpose (`at` is n×m, one row per column of the original).
Svd tall_svd_from_transpose(Tensor at) {
  const std::size_t n = at.rows(), m = at.cols();
  Tensor v = Tensor::identity(n);
  jacobi_orthogonalize(at, v);

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::span<const double> row(at.raw() + j * m, m);
    sigma[j] = std::sqrt(dot(row, row));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  Tensor ut({n, m});
  Tensor vt({n, n});
  Tensor s({n});
  std::vector<bool> missing(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    s[j] = sigma[src];
    std::copy_n(v.raw() + src * n, n, vt.raw() + j * n);
    if (sigma[src] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) ut(j, i) = at(src, i) / sigma[src];
    } else {
      missing[j] = true;
    }
  }
  complete_orthonormal_rows(ut, missing);
  return {transpose(ut), std::move(s), std::move(vt)};
}

}  // namespace

Qr householder_qr(const Tensor& a) {
  require_matrix(a, "householder_qr");
  const std::size_t m = a.rows(), n = a.cols();
  if (m < n) {
    throw ShapeError("householder_qr: needs rows >= cols, got " + shape_string(a.shape()));
  }
  // Work on the transpose so that each column is a contiguous row.
  Tensor at = transpose(a);
  std::vector<std::vector<double>> reflectors(n);
  std::vector<double> rdiag(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::span<double> col(at.raw() + j * m + j, m - j);
    const double norm = std::sqrt(dot(col, col));
    const double alpha = col[0] >= 0.0 ? -norm : norm;
    std::vector<double> vj(col.begin(), col.end());
    vj[0] -= alpha;
    const double vnorm2 = dot(vj, vj);
    rdiag[j] = alpha;
    if (vnorm2 > 0.0) {
      for (std::size_t c = j + 1; c < n; ++c) {
        std::span<double> target(at.raw() + c * m + j, m - j);
        axpy_span(-2.0 * dot(vj, target) / vnorm2, vj, target);
      }
      const double scale = 1.0 / std::sqrt(vnorm2);
      for (double& x : vj) x *= scale;
    } else {
      std::fill(vj.begin(), vj.end(), 0.0);
    }
    reflectors[j] = std::move(vj);
  }

  Tensor r({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    r(i, i) = rdiag[i];
    for (std::size_t c = i + 1; c < n; ++c) r(i, c) = at(c, i);
  }

  Tensor qt({n, m});
  for (std::size_t c = 0; c < n; ++c) {
    std::span<double> x(qt.raw() + c * m, m);
    x[c] = 1.0;
    for (std::size_t j = c + 1; j-- > 0;) {
      const auto& vj = reflectors[j];
      std::span<double> tail = x.subspan(j);
      axpy_span(-2.0 * dot(vj, tail), vj, tail);
    }
  }
  return {transpose(qt), std::move(r)};
}

Svd dense_svd(const Tensor& m) {
  require_matrix(m, "dense_svd");
  if (m.rows() * m.cols() > kDenseSvdMaxEntries) {
    throw ShapeError("dense_svd: " + shape_string(m.shape()) + " exceeds the dense size guard of " +
                     std::to_string(kDenseSvdMaxEntries) + " entries");
  }
  require_finite(m, "dense_svd");
  if (m.rows() < m.cols()) {
    Svd t = dense_svd(transpose(m));
    return {transpose(t.vt), std::move(t.s), transpose(t.u)};
  }
  if (m.rows() == m.cols()) return tall_svd_from_transpose(transpose(m));

  Qr qr = householder_qr(m);
  Svd inner = tall_svd_from_transpose(transpose(qr.r));
  return {matmul(qr.q, inner.u), std::move(inner.s), std::move(inner.vt)};
}

Svd randomized_svd(const Tensor& m, std::size_t rank, const RandomizedSvdOptions& options) {
  require_matrix(m, "randomized_svd");
  const std::size_t rows = m.rows(), cols = m.cols();
  const std::size_t min_dim = std::min(rows, cols);
  if (rank == 0 || rank > min_dim) {
    throw ShapeError("randomized_svd: rank " + std::to_string(rank) + " not in [1, " + std::to_string(min_dim) +
                     "] for " + shape_string(m.shape()));
  }
  require_finite(m, "randomized_svd");
  const std::size_t width = std::min(rank + options.oversample, min_dim);

  Rng rng(options.seed);
  Tensor omega = normal_tensor({cols, width}, rng);
  Tensor q = householder_qr(matmul(m, omega)).q;
  for (std::size_t it = 0; it < options.power_iters; ++it) {
    Tensor z = householder_qr(matmul_tn(m, q)).q;
    q = householder_qr(matmul(m, z)).q;
  }
  Svd small = dense_svd(matmul_tn(q, m));
  Tensor u = matmul(q, small.u);

  Svd out{Tensor({rows, rank}), Tensor({rank}), Tensor({rank, cols})};
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < rank; ++j) out.u(i, j) = u(i, j);
  for (std::size_t j = 0; j < rank; ++j) out.s[j] = small.s[j];
  std::copy_n(small.vt.raw(), rank * cols, out.vt.raw());
  return out;
}

Tensor svd_reconstruct(const Svd& svd) {
  Tensor us = svd.u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= svd.s[j];
  return matmul(us, svd.vt);
}

}  // namespace gitnet
