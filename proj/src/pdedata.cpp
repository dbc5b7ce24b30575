#include "gitnet/pdedata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gitnet/linalg.hpp"
#include "gitnet/rng.hpp"

namespace gitnet {

namespace {

constexpr double kGpEigenFloor = 1e-12;

// Draws zero-mean samples with covariance exp(−(x−y)²/(2ℓ²)) on n uniform
// points of [0,1] through K = U·diag(λ)·Uᵀ, x = U·diag(√λ)·z.
class RbfSampler {
 public:
  RbfSampler(std::size_t n, double lengthscale) : n_(n), factor_({n, n}) {
    if (n < 2) throw std::invalid_argument("sample_gp_rbf_1d: need at least 2 points");
    if (!(lengthscale > 0.0)) throw std::invalid_argument("sample_gp_rbf_1d: lengthscale must be positive");
    Tensor cov({n, n});
    const double step = 1.0 / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double d = (static_cast<double>(i) - static_cast<double>(j)) * step;
        cov(i, j) = std::exp(-d * d / (2.0 * lengthscale * lengthscale));
      }
    }
    const Svd eig = dense_svd(cov);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) factor_(i, k) = eig.u(i, k) * std::sqrt(std::max(eig.s[k], kGpEigenFloor));
  }

  void sample(Rng& rng, std::span<double> out) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(n_);
    for (double& v : z) v = normal(rng);
    for (std::size_t i = 0; i < n_; ++i) out[i] = dot({factor_.raw() + i * n_, n_}, z);
  }

 private:
  std::size_t n_;
  Tensor factor_;
};

// Real Fourier synthesis of the (−Δ+9)⁻² field on n periodic points.
class GrfSampler {
 public:
  explicit GrfSampler(std::size_t n) : n_(n), modes_(n / 2), cos_(modes_ * n), sin_(modes_ * n) {
    if (n < 2 || n % 2 != 0) {
      throw std::invalid_argument("sample_grf_periodic_1d: mesh size must be even and >= 2, got " + std::to_string(n));
    }
    for (std::size_t k = 1; k < modes_; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(k * j % n) / static_cast<double>(n);
        cos_[k * n + j] = std::numbers::sqrt2 * std::cos(phase);
        sin_[k * n + j] = std::numbers::sqrt2 * std::sin(phase);
      }
    }
  }

  void sample(Rng& rng, std::span<double> out) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::fill(out.begin(), out.end(), grf_mode_stddev(0) * normal(rng));
    for (std::size_t k = 1; k < modes_; ++k) {
      const double a = grf_mode_stddev(k) * normal(rng);
      const double b = grf_mode_stddev(k) * normal(rng);
      for (std::size_t j = 0; j < n_; ++j) out[j] += a * cos_[k * n_ + j] + b * sin_[k * n_ + j];
    }
  }

 private:
  std::size_t n_;
  std::size_t modes_;
  std::vector<double> cos_, sin_;
};

// Lower band of a symmetric positive definite matrix: entry (i, j), i−w ≤ j ≤ i.
class BandedCholesky {
 public:
  BandedCholesky(std::size_t n, std::size_t w) : n_(n), w_(w), band_(n * (w + 1), 0.0) {}

  double& at(std::size_t i, std::size_t j) { return band_[i * (w_ + 1) + (j + w_ - i)]; }
  double at(std::size_t i, std::size_t j) const { return band_[i * (w_ + 1) + (j + w_ - i)]; }

  void factorize() {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t lo = i > w_ ? i - w_ : 0;
      for (std::size_t j = lo; j <= i; ++j) {
        double sum = at(i, j);
        const std::size_t klo = std::max(lo, j > w_ ? j - w_ : 0);
        for (std::size_t k = klo; k < j; ++k) sum -= at(i, k) * at(j, k);
        if (i == j) {
          if (!(sum > 0.0)) throw NumericError("Poisson solver: matrix is not positive definite");
          at(i, i) = std::sqrt(sum);
        } else {
          at(i, j) = sum / at(j, j);
        }
      }
    }
  }

  std::vector<double> release() && { return std::move(band_); }

 private:
  std::size_t n_, w_;
  std::vector<double> band_;
};

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> Mesh2D::boundary_nodes() const {
  std::vector<std::pair<std::size_t, std::size_t>> nodes;
  nodes.reserve(boundary_size());
  for (std::size_t i = 0; i < nx; ++i) nodes.emplace_back(i, 0);
  for (std::size_t j = 1; j < ny; ++j) nodes.emplace_back(nx - 1, j);
  for (std::size_t i = nx - 1; i-- > 0;) nodes.emplace_back(i, ny - 1);
  for (std::size_t j = ny - 1; j-- > 1;) nodes.emplace_back(0, j);
  return nodes;
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw ShapeError("Dataset::slice: range out of bounds");
  const std::size_t in_stride = inputs.size() / size(), out_stride = outputs.size() / size();
  Dataset out = *this;
  out.inputs = Tensor({end - begin, d_in(), n_points_in()},
                      std::vector<double>(inputs.raw() + begin * in_stride, inputs.raw() + end * in_stride));
  out.outputs = Tensor({end - begin, d_out(), n_points_out()},
                       std::vector<double>(outputs.raw() + begin * out_stride, outputs.raw() + end * out_stride));
  return out;
}

void Dataset::validate() const {
  if (inputs.rank() != 3 || outputs.rank() != 3 || inputs.extent(0) != outputs.extent(0)) {
    throw ShapeError("Dataset: inputs " + shape_string(inputs.shape()) + " and outputs " +
                     shape_string(outputs.shape()) + " must be [N×d×points] with matching N");
  }
  require_finite(inputs, "Dataset inputs");
  require_finite(outputs, "Dataset outputs");
}

double grf_mode_stddev(std::size_t k) noexcept {
  const double w = 2.0 * std::numbers::pi * static_cast<double>(k);
  return 1.0 / (w * w + 9.0);
}

Tensor sample_grf_periodic_1d(const Mesh1D& mesh, std::size_t n_samples, std::uint64_t seed) {
  const GrfSampler sampler(mesh.n);
  Tensor out({n_samples, mesh.n});
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng(sample_seed(seed, i));
    sampler.sample(rng, {out.raw() + i * mesh.n, mesh.n});
  }
  return out;
}

Dataset advection_dataset(const Mesh1D& mesh, std::size_t n_samples, std::uint64_t seed) {
  const std::size_t n = mesh.n;
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("advection_dataset: mesh size must be even, got " + std::to_string(n));
  const Tensor xi = sample_grf_periodic_1d(mesh, n_samples, seed);
  Dataset ds;
  ds.generator = "advection";
  ds.mesh = {n};
  ds.seed = seed;
  ds.inputs = Tensor({n_samples, 1, n});
  ds.outputs = Tensor({n_samples, 1, n});
  const std::size_t shift = n / 2;
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (std::size_t j = 0; j < n; ++j) ds.inputs(s, 0, j) = xi(s, j) >= 0.0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < n; ++j) ds.outputs(s, 0, j) = ds.inputs(s, 0, (j + n - shift) % n);
  }
  return ds;
}

Tensor sample_gp_rbf_1d(std::size_t n_points, double lengthscale, std::size_t n_samples, std::uint64_t seed) {
  const RbfSampler sampler(n_points, lengthscale);
  Tensor out({n_samples, n_points});
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng(sample_seed(seed, i));
    sampler.sample(rng, {out.raw() + i * n_points, n_points});
  }
  return out;
}

PoissonSolver::PoissonSolver(const Mesh2D& mesh) : mesh_(mesh), bandwidth_(mesh.nx >= 2 ? mesh.nx - 2 : 0) {
  if (mesh.nx < 3 || mesh.ny < 3) throw std::invalid_argument("PoissonSolver: grid must be at least 3x3");
  hx2_ = std::pow(1.0 / static_cast<double>(mesh.nx - 1), 2);
  hy2_ = std::pow(1.0 / static_cast<double>(mesh.ny - 1), 2);
  const std::size_t mx = mesh.nx - 2, my = mesh.ny - 2;
  BandedCholesky chol(mx * my, bandwidth_);
  for (std::size_t j = 0; j < my; ++j) {
    for (std::size_t i = 0; i < mx; ++i) {
      const std::size_t row = j * mx + i;
      chol.at(row, row) = 2.0 / hx2_ + 2.0 / hy2_;
      if (i > 0) chol.at(row, row - 1) = -1.0 / hx2_;
      if (j > 0) chol.at(row, row - mx) = -1.0 / hy2_;
    }
  }
  chol.factorize();
  factor_ = std::move(chol).release();
}

std::vector<double> PoissonSolver::rhs(std::span<const double> boundary, double source, Tensor& grid) const {
  const std::size_t nx = mesh_.nx, ny = mesh_.ny, mx = nx - 2;
  if (boundary.size() != mesh_.boundary_size()) {
    throw ShapeError("PoissonSolver: expected " + std::to_string(mesh_.boundary_size()) + " boundary values, got " +
                     std::to_string(boundary.size()));
  }
  grid = Tensor({ny, nx});
  const auto nodes = mesh_.boundary_nodes();
  for (std::size_t b = 0; b < nodes.size(); ++b) grid(nodes[b].second, nodes[b].first) = boundary[b];
  std::vector<double> b(mesh_.interior_size(), source);
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      double& r = b[(j - 1) * mx + (i - 1)];
      if (i == 1) r += grid(j, 0) / hx2_;
      if (i + 2 == nx) r += grid(j, nx - 1) / hx2_;
      if (j == 1) r += grid(0, i) / hy2_;
      if (j + 2 == ny) r += grid(ny - 1, i) / hy2_;
    }
  }
  return b;
}

double PoissonSolver::residual(const Tensor& grid, double source) const {
  const std::size_t nx = mesh_.nx, ny = mesh_.ny;
  const double diag = 2.0 / hx2_ + 2.0 / hy2_;
  double worst = 0.0, hmax = 0.0;
  for (double v : grid.data()) hmax = std::max(hmax, std::abs(v));
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const double lap = diag * grid(j, i) - (grid(j, i - 1) + grid(j, i + 1)) / hx2_ -
                         (grid(j - 1, i) + grid(j + 1, i)) / hy2_;
      worst = std::max(worst, std::abs(lap - source));
    }
  }
  return worst / (2.0 * diag * hmax + std::abs(source) + 1e-300);
}

Tensor PoissonSolver::solve_grid(std::span<const double> boundary, double source) const {
  Tensor grid;
  std::vector<double> x = rhs(boundary, source, grid);
  const std::size_t mx = mesh_.nx - 2;
  // Forward/back substitution against the stored band.
  const std::size_t n = x.size(), w = bandwidth_;
  auto at = [&](std::size_t i, std::size_t j) { return factor_[i * (w + 1) + (j + w - i)]; };
  for (std::size_t i = 0; i < n; ++i) {
    double sum = x[i];
    for (std::size_t k = i > w ? i - w : 0; k < i; ++k) sum -= at(i, k) * x[k];
    x[i] = sum / at(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double sum = x[i];
    for (std::size_t k = i + 1; k < std::min(n, i + w + 1); ++k) sum -= at(k, i) * x[k];
    x[i] = sum / at(i, i);
  }
  for (std::size_t j = 1; j + 1 < mesh_.ny; ++j)
    for (std::size_t i = 1; i + 1 < mesh_.nx; ++i) grid(j, i) = x[(j - 1) * mx + (i - 1)];

  const double res = residual(grid, source);
  if (!(res <= kResidualTolerance)) {
    std::ostringstream os;
    os << "Poisson solver: relative residual " << res << " exceeds " << kResidualTolerance;
    throw NumericError(os.str());
  }
  return grid;
}

Tensor PoissonSolver::solve(std::span<const double> boundary, double source) const {
  const Tensor grid = solve_grid(boundary, source);
  const std::size_t mx = mesh_.nx - 2, my = mesh_.ny - 2;
  Tensor interior({mx * my});
  for (std::size_t j = 0; j < my; ++j)
    for (std::size_t i = 0; i < mx; ++i) interior[j * mx + i] = grid(j + 1, i + 1);
  return interior;
}

Dataset poisson_dataset(const Mesh2D& mesh, std::size_t n_samples, std::uint64_t seed) {
  const PoissonSolver solver(mesh);
  const RbfSampler along_x(mesh.nx, kPoissonLengthscale);
  const RbfSampler along_y(mesh.ny, kPoissonLengthscale);
  const std::size_t nx = mesh.nx, ny = mesh.ny, nb = mesh.boundary_size();

  Dataset ds;
  ds.generator = "poisson";
  ds.mesh = {nx, ny};
  ds.seed = seed;
  ds.inputs = Tensor({n_samples, 1, nb});
  ds.outputs = Tensor({n_samples, 1, mesh.interior_size()});
  std::vector<double> bottom(nx), right(ny), top(nx), left(ny), boundary(nb);
  for (std::size_t s = 0; s < n_samples; ++s) {
    Rng rng(sample_seed(seed, s));
    along_x.sample(rng, bottom);
    along_y.sample(rng, right);
    along_x.sample(rng, top);
    along_y.sample(rng, left);
    // Side traces are indexed by increasing x (bottom/top) or y (left/right).
    auto value = [&](std::size_t i, std::size_t j) {
      const bool on_bottom = j == 0, on_top = j == ny - 1, on_left = i == 0, on_right = i == nx - 1;
      if (on_bottom && on_left) return 0.5 * (bottom[0] + left[0]);
      if (on_bottom && on_right) return 0.5 * (bottom[nx - 1] + right[0]);
      if (on_top && on_right) return 0.5 * (top[nx - 1] + right[ny - 1]);
      if (on_top && on_left) return 0.5 * (top[0] + left[ny - 1]);
      if (on_bottom) return bottom[i];
      if (on_top) return top[i];
      if (on_left) return left[j];
      return right[j];
    };
    const auto nodes = mesh.boundary_nodes();
    for (std::size_t b = 0; b < nb; ++b) boundary[b] = value(nodes[b].first, nodes[b].second);
    std::copy(boundary.begin(), boundary.end(), ds.inputs.raw() + s * nb);
    const Tensor interior = solver.solve(boundary, kPoissonSource);
    std::copy(interior.data().begin(), interior.data().end(), ds.outputs.raw() + s * mesh.interior_size());
  }
  return ds;
}

LinearOperatorData linear_operator_dataset(std::size_t n_in, std::size_t n_out, std::size_t rank,
                                           std::size_t n_samples, double noise_std, std::uint64_t seed) {
  if (rank == 0 || rank > std::min(n_in, n_out)) {
    throw std::invalid_argument("linear_operator_dataset: rank must lie in [1, min(n_in, n_out)]");
  }
  Rng op_rng(splitmix64(~seed));
  const Tensor u = normal_tensor({n_out, rank}, op_rng);
  const Tensor v = normal_tensor({n_in, rank}, op_rng);
  LinearOperatorData out;
  out.op = (1.0 / std::sqrt(static_cast<double>(rank))) * matmul_nt(u, v);

  Dataset& ds = out.data;
  ds.generator = "linear";
  ds.mesh = {n_in, n_out};
  ds.seed = seed;
  ds.inputs = Tensor({n_samples, 1, n_in});
  ds.outputs = Tensor({n_samples, 1, n_out});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t s = 0; s < n_samples; ++s) {
    Rng rng(sample_seed(seed, s));
    double* f = ds.inputs.raw() + s * n_in;
    for (std::size_t j = 0; j < n_in; ++j) f[j] = normal(rng);
    double* g = ds.outputs.raw() + s * n_out;
    for (std::size_t i = 0; i < n_out; ++i) {
      g[i] = dot({out.op.raw() + i * n_in, n_in}, {f, n_in});
      if (noise_std != 0.0) g[i] += noise_std * normal(rng);
    }
  }
  return out;
}

}  // namespace gitnet
