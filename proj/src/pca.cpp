#include "gitnet/pca.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gitnet/linalg.hpp"

namespace gitnet {

namespace {

std::size_t select_rank(const Tensor& s, double total, double threshold, std::size_t cap) {
  double cumulative = 0.0;
  std::size_t p = s.size();
  for (std::size_t k = 0; k < s.size(); ++k) {
    cumulative += s[k] * s[k];
    if (cumulative >= threshold * total) {
      p = k + 1;
      break;
    }
  }
  return std::max<std::size_t>(1, std::min(p, cap));
}

void require_points(const PcaBasis& basis, const Tensor& t, std::size_t axis_extent, const char* op) {
  if (t.rank() != 2 || axis_extent != basis.n_points) {
    throw ShapeError(std::string(op) + ": expected [d×" + std::to_string(basis.n_points) + "], got " +
                     shape_string(t.shape()));
  }
}

}  // namespace

PcaBasis fit_pca(const Tensor& samples, const PcaOptions& options) {
  require_matrix(samples, "fit_pca");
  const std::size_t m = samples.rows(), n = samples.cols();
  if (m < 2) throw ShapeError("fit_pca: need at least 2 samples, got " + std::to_string(m));
  if (n < 1) throw ShapeError("fit_pca: samples have no mesh points");
  if (!(options.energy_threshold > 0.0 && options.energy_threshold <= 1.0)) {
    throw std::invalid_argument("fit_pca: energy_threshold must lie in (0, 1]");
  }
  if (options.p_cap < 1) throw std::invalid_argument("fit_pca: p_cap must be >= 1");
  require_finite(samples, "fit_pca");

  PcaBasis basis;
  basis.n_points = n;
  basis.energy_threshold = options.energy_threshold;
  basis.p_cap = options.p_cap;
  basis.centered = options.center;
  basis.mean = Tensor({n});
  if (options.center) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) basis.mean[j] += samples(i, j);
    for (double& v : basis.mean.data()) v /= static_cast<double>(m);
  }

  Tensor centered = samples;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) centered(i, j) -= basis.mean[j];

  const double frob2 = dot(centered.data(), centered.data());
  if (frob2 == 0.0) {
    basis.degenerate = true;
    basis.components = Tensor({1, n});
    basis.components(0, 0) = 1.0;
    basis.singular_values = Tensor({1});
    return basis;
  }

  Svd svd;
  double total = 0.0;
  if (m * n > kRandomizedPcaThreshold) {
    const std::size_t rank = std::min({options.p_cap, m, n});
    svd = randomized_svd(centered, rank, {.seed = options.seed});
    total = frob2;
  } else {
    svd = dense_svd(centered);
    total = dot(svd.s.data(), svd.s.data());
  }

  const std::size_t p = select_rank(svd.s, total, options.energy_threshold, options.p_cap);
  basis.components = Tensor({p, n});
  std::copy_n(svd.vt.raw(), p * n, basis.components.raw());
  basis.singular_values = Tensor({p});
  double kept = 0.0;
  for (std::size_t k = 0; k < p; ++k) {
    basis.singular_values[k] = svd.s[k];
    kept += svd.s[k] * svd.s[k];
  }
  if (m * n > kRandomizedPcaThreshold) {
    basis.tail_energy = std::max(0.0, total - kept);
  } else {
    double tail = 0.0;
    for (std::size_t k = p; k < svd.s.size(); ++k) tail += svd.s[k] * svd.s[k];
    basis.tail_energy = tail;
  }
  return basis;
}

Tensor encode(const PcaBasis& basis, const Tensor& f) {
  require_points(basis, f, f.rank() == 2 ? f.cols() : 0, "encode");
  Tensor centered = f;
  for (std::size_t c = 0; c < f.rows(); ++c)
    for (std::size_t j = 0; j < basis.n_points; ++j) centered(c, j) -= basis.mean[j];
  return matmul_nt(centered, basis.components);
}

Tensor decode(const PcaBasis& basis, const Tensor& alpha) {
  if (alpha.rank() != 2 || alpha.cols() != basis.size()) {
    throw ShapeError("decode: expected [d×" + std::to_string(basis.size()) + "], got " + shape_string(alpha.shape()));
  }
  Tensor f = matmul(alpha, basis.components);
  for (std::size_t c = 0; c < f.rows(); ++c)
    for (std::size_t j = 0; j < basis.n_points; ++j) f(c, j) += basis.mean[j];
  return f;
}

void validate(const PcaBasis& basis) {
  const std::size_t n = basis.n_points;
  if (basis.mean.shape() != Shape{n} || basis.components.rank() != 2 || basis.components.cols() != n ||
      basis.singular_values.shape() != Shape{basis.components.rows()} || basis.components.rows() == 0) {
    throw ShapeError("PcaBasis: inconsistent shapes (mean " + shape_string(basis.mean.shape()) + ", components " +
                     shape_string(basis.components.shape()) + ", singular values " +
                     shape_string(basis.singular_values.shape()) + ")");
  }
  require_finite(basis.mean, "PcaBasis mean");
  require_finite(basis.components, "PcaBasis components");
  require_finite(basis.singular_values, "PcaBasis singular values");
}

}  // namespace gitnet
