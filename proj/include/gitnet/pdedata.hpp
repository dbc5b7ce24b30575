#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gitnet/tensor.hpp"

namespace gitnet {

/// Uniform grid x_j = j/n on the periodic unit interval.
struct Mesh1D {
  std::size_t n = 0;
};

/// Uniform nx×ny grid on the closed unit square, x_i = i/(nx−1), y_j = j/(ny−1).
struct Mesh2D {
  std::size_t nx = 0;
  std::size_t ny = 0;

  std::size_t boundary_size() const noexcept { return 2 * nx + 2 * ny - 4; }
  std::size_t interior_size() const noexcept { return (nx - 2) * (ny - 2); }
  /// Grid (i, j) of every boundary node, counter-clockwise from the origin.
  std::vector<std::pair<std::size_t, std::size_t>> boundary_nodes() const;
};

/// Paired discretised functions. inputs is [N×d_in×N_u], outputs [N×d_out×N_v].
struct Dataset {
  Tensor inputs;
  Tensor outputs;
  std::string generator;
  std::vector<std::size_t> mesh;  ///< grid extents, informational
  std::uint64_t seed = 0;

  std::size_t size() const { return inputs.empty() ? 0 : inputs.extent(0); }
  std::size_t d_in() const { return inputs.extent(1); }
  std::size_t n_points_in() const { return inputs.extent(2); }
  std::size_t d_out() const { return outputs.extent(1); }
  std::size_t n_points_out() const { return outputs.extent(2); }

  /// Samples [begin, end) as a new dataset.
  Dataset slice(std::size_t begin, std::size_t end) const;
  /// Throws ShapeError/NumericError on inconsistent extents or non-finite data.
  void validate() const;
};

/// Samples of the Gaussian field with covariance (−Δ+9)⁻² on the periodic
/// unit interval, synthesised from real Fourier modes below Nyquist.
Tensor sample_grf_periodic_1d(const Mesh1D& mesh, std::size_t n_samples, std::uint64_t seed);

/// Standard deviation of the mode-k Fourier coefficient: ((2πk)² + 9)⁻¹.
double grf_mode_stddev(std::size_t k) noexcept;

/// Transport u_t + u_x = 0 on the torus to T = 0.5 with u₀ = sign(ξ).
Dataset advection_dataset(const Mesh1D& mesh, std::size_t n_samples, std::uint64_t seed);

/// Zero-mean Gaussian process samples with RBF covariance on n uniform points of [0,1].
Tensor sample_gp_rbf_1d(std::size_t n_points, double lengthscale, std::size_t n_samples, std::uint64_t seed);

inline constexpr double kPoissonLengthscale = 0.2;
inline constexpr double kPoissonSource = -1.0;

/// Direct solver for −Δh = f on the interior of a Mesh2D with 5-point
/// differences and Dirichlet data. The banded Cholesky factor is computed
/// once and reused for every solve.
class PoissonSolver {
 public:
  explicit PoissonSolver(const Mesh2D& mesh);

  /// `boundary` follows Mesh2D::boundary_nodes(); `source` is constant.
  /// Returns interior values in row-major (j, i) order.
  Tensor solve(std::span<const double> boundary, double source) const;
  /// Full grid [ny×nx] with the boundary filled in.
  Tensor solve_grid(std::span<const double> boundary, double source) const;

  const Mesh2D& mesh() const noexcept { return mesh_; }
  /// Relative residual ‖Ah − b‖∞ / (‖A‖∞‖h‖∞ + ‖b‖∞) of the last-solved system is below this.
  static constexpr double kResidualTolerance = 1e-10;

 private:
  Mesh2D mesh_;
  std::size_t bandwidth_;
  std::vector<double> factor_;  ///< lower band, (bandwidth+1) entries per row
  double hx2_, hy2_;

  std::vector<double> rhs(std::span<const double> boundary, double source, Tensor& grid) const;
  double residual(const Tensor& grid, double source) const;
};

/// Boundary traces from four independent RBF Gaussian processes
/// (ℓ = 0.2) mapped to the interior solution of −Δh = −1.
Dataset poisson_dataset(const Mesh2D& mesh, std::size_t n_samples, std::uint64_t seed);

struct LinearOperatorData {
  Dataset data;
  Tensor op;  ///< [n_out×n_in], rank-`rank`
};

/// g_i = A·f_i + noise_std·ε_i with A = U·Vᵀ/√rank and Gaussian f_i.
LinearOperatorData linear_operator_dataset(std::size_t n_in, std::size_t n_out, std::size_t rank,
                                           std::size_t n_samples, double noise_std, std::uint64_t seed);

}  // namespace gitnet
