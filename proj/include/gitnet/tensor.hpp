#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gitnet {

/// Raised when operand extents do not conform.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised on non-finite values, failed convergence and similar numeric faults.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles.
///
/// The product of the extents always equals the number of stored entries.
/// Tensors are plain values: copies are deep, moves are cheap.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  /// Builds a rank-2 tensor from nested rows, e.g. `Tensor::matrix({{1, 2}, {3, 4}})`.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor vector(std::initializer_list<double> values);
  static Tensor identity(std::size_t n);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  /// Rows/cols of a rank-2 tensor.
  std::size_t rows() const { return extent(0); }
  std::size_t cols() const { return extent(1); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  double* raw() noexcept { return data_.data(); }
  const double* raw() const noexcept { return data_.data(); }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * shape_[1] + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * shape_[1] + j]; }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  /// Same data viewed with a different shape of equal total size.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  void fill(double value) noexcept;
  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Throws ShapeError unless `t` has rank 2.
void require_matrix(const Tensor& t, const char* what);
/// Throws NumericError if any entry is NaN or infinite.
void require_finite(const Tensor& t, const char* what);

// ---------------------------------------------------------------------------
// Dense kernels. Every reduction runs over its contracted index in ascending
// order, so a kernel's output is bit-identical to the naive triple loop.
// ---------------------------------------------------------------------------

/// C = A·B for A[m×k], B[k×n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// C = Aᵀ·B for A[k×m], B[k×n].
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// C = A·Bᵀ for A[m×k], B[n×k].
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

/// out[b] = M · X[b] for M[r×c] and X[B×c×k]; result is [B×r×k].
Tensor left_multiply_batched(const Tensor& m, const Tensor& x);
/// Σ_b G[b] · X[b]ᵀ for G[B×r×k], X[B×c×k]; result is [r×c].
Tensor sum_outer_batched(const Tensor& g, const Tensor& x);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);
Tensor hadamard(const Tensor& a, const Tensor& b);
/// a += s·b (shapes must have equal size).
void axpy(double s, const Tensor& b, Tensor& a);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double frobenius_norm(const Tensor& a) noexcept;
double max_abs_diff(const Tensor& a, const Tensor& b);

/// Exact GELU, x·Φ(x) with Φ the standard normal CDF.
double gelu(double x) noexcept;
/// d/dx gelu(x) = Φ(x) + x·φ(x).
double gelu_grad(double x) noexcept;
Tensor gelu(const Tensor& x);
Tensor gelu_grad(const Tensor& x);

/// Flops charged per GELU evaluation by the instrumented counter.
inline constexpr std::size_t kGeluFlops = 15;

}  // namespace gitnet
