#include "gitnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>

#include "gitnet/flops.hpp"

namespace gitnet {

namespace {

std::size_t product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

void require_same_size(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (product(shape_) != data_.size()) {
    throw ShapeError("tensor shape " + shape_string(shape_) + " does not match " +
                     std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(m * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw ShapeError("Tensor::matrix: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({m, n}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_string(shape_));
  }
  return shape_[axis];
}

Tensor Tensor::reshaped(Shape shape) const& { return Tensor(std::move(shape), data_); }

Tensor Tensor::reshaped(Shape shape) && { return Tensor(std::move(shape), std::move(data_)); }

void Tensor::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) throw ShapeError(std::string(what) + ": expected a matrix, got " + shape_string(t.shape()));
}

void require_finite(const Tensor& t, const char* what) {
  if (!t.all_finite()) throw NumericError(std::string(what) + ": non-finite entry");
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw ShapeError("matmul: inner extents differ " + shape_string(a.shape()) + " · " + shape_string(b.shape()));
  }
  Tensor c({m, n});
  const double* pa = a.raw();
  const double* pb = b.raw();
  double* pc = c.raw();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = pc + i * n;
    for (std::size_t t = 0; t < k; ++t) {
      const double s = pa[i * k + t];
      const double* brow = pb + t * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += s * brow[j];
    }
  }
  detail::add_flops(2 * m * n * k);
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_tn");
  require_matrix(b, "matmul_tn");
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw ShapeError("matmul_tn: inner extents differ " + shape_string(a.shape()) + "ᵀ · " +
                     shape_string(b.shape()));
  }
  Tensor c({m, n});
  const double* pa = a.raw();
  const double* pb = b.raw();
  double* pc = c.raw();
  for (std::size_t t = 0; t < k; ++t) {
    const double* brow = pb + t * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double s = pa[t * m + i];
      double* crow = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += s * brow[j];
    }
  }
  detail::add_flops(2 * m * n * k);
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw ShapeError("matmul_nt: inner extents differ " + shape_string(a.shape()) + " · " +
                     shape_string(b.shape()) + "ᵀ");
  }
  Tensor c({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    std::span<const double> arow(a.raw() + i * k, k);
    for (std::size_t j = 0; j < n; ++j) c(i, j) = dot(arow, std::span<const double>(b.raw() + j * k, k));
  }
  detail::add_flops(2 * m * n * k);
  return c;
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  Tensor t({a.cols(), a.rows()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Tensor left_multiply_batched(const Tensor& m, const Tensor& x) {
  require_matrix(m, "left_multiply_batched");
  if (x.rank() != 3 || x.extent(1) != m.cols()) {
    throw ShapeError("left_multiply_batched: " + shape_string(m.shape()) + " · " + shape_string(x.shape()));
  }
  const std::size_t batch = x.extent(0), r = m.rows(), c = m.cols(), k = x.extent(2);
  Tensor out({batch, r, k});
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xb = x.raw() + b * c * k;
    double* ob = out.raw() + b * r * k;
    for (std::size_t i = 0; i < r; ++i) {
      double* orow = ob + i * k;
      for (std::size_t d = 0; d < c; ++d) {
        const double s = m(i, d);
        const double* xrow = xb + d * k;
        for (std::size_t j = 0; j < k; ++j) orow[j] += s * xrow[j];
      }
    }
  }
  detail::add_flops(2 * batch * r * c * k);
  return out;
}

Tensor sum_outer_batched(const Tensor& g, const Tensor& x) {
  if (g.rank() != 3 || x.rank() != 3 || g.extent(0) != x.extent(0) || g.extent(2) != x.extent(2)) {
    throw ShapeError("sum_outer_batched: " + shape_string(g.shape()) + " vs " + shape_string(x.shape()));
  }
  const std::size_t batch = g.extent(0), r = g.extent(1), c = x.extent(1), k = g.extent(2);
  Tensor out({r, c});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < r; ++i) {
      std::span<const double> grow(g.raw() + (b * r + i) * k, k);
      for (std::size_t j = 0; j < c; ++j) {
        out(i, j) += dot(grow, std::span<const double>(x.raw() + (b * c + j) * k, k));
      }
    }
  }
  detail::add_flops(2 * batch * r * c * k);
  return out;
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  require_same_size(a, b, "add");
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  detail::add_flops(c.size());
  return c;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  require_same_size(a, b, "subtract");
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  detail::add_flops(c.size());
  return c;
}

Tensor operator*(double s, const Tensor& a) {
  Tensor c = a;
  for (double& v : c.data()) v *= s;
  detail::add_flops(c.size());
  return c;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_size(a, b, "hadamard");
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= b[i];
  detail::add_flops(c.size());
  return c;
}

void axpy(double s, const Tensor& b, Tensor& a) {
  if (a.size() != b.size()) throw ShapeError("axpy: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
  detail::add_flops(2 * a.size());
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double frobenius_norm(const Tensor& a) noexcept { return std::sqrt(dot(a.data(), a.data())); }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw ShapeError("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double gelu(double x) noexcept {
  // erfc keeps the left tail accurate where 1 + erf(x) would cancel.
  return x * 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double gelu_grad(double x) noexcept {
  constexpr double inv_sqrt_2pi = 0.3989422804014327;
  const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
  return cdf + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

Tensor gelu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = gelu(v);
  detail::add_flops(kGeluFlops * y.size());
  return y;
}

Tensor gelu_grad(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = gelu_grad(v);
  detail::add_flops(kGeluFlops * y.size());
  return y;
}

}  // namespace gitnet
