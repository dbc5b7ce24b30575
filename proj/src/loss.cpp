#include "gitnet/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gitnet {

namespace {

std::size_t sample_count(const Tensor& preds, const Tensor& targets, const char* op) {
  if (preds.shape() != targets.shape() || preds.rank() == 0) {
    throw ShapeError(std::string(op) + ": prediction " + shape_string(preds.shape()) + " vs target " +
                     shape_string(targets.shape()));
  }
  const std::size_t n = preds.extent(0);
  if (n == 0) throw ShapeError(std::string(op) + ": no samples");
  return n;
}

double squared_norm(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double target_norm2(const Tensor& targets, std::size_t i, std::size_t stride, const char* op) {
  const double t2 = squared_norm(targets.raw() + i * stride, stride);
  if (t2 == 0.0) throw NumericError(std::string(op) + ": target of sample " + std::to_string(i) + " has zero norm");
  return t2;
}

}  // namespace

std::string_view to_string(LossKind k) { return k == LossKind::absolute_mse ? "absolute_mse" : "relative"; }

LossKind parse_loss(std::string_view s) {
  if (s == "absolute_mse") return LossKind::absolute_mse;
  if (s == "relative") return LossKind::relative;
  throw std::invalid_argument("unknown loss '" + std::string(s) + "' (absolute_mse|relative)");
}

std::vector<double> per_sample_loss(const Tensor& preds, const Tensor& targets, LossKind kind) {
  const std::size_t n = sample_count(preds, targets, "empirical_loss");
  const std::size_t stride = preds.size() / n;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = squared_distance(preds.raw() + i * stride, targets.raw() + i * stride, stride);
    if (kind == LossKind::relative) out[i] /= target_norm2(targets, i, stride, "empirical_loss");
  }
  return out;
}

double empirical_loss(const Tensor& preds, const Tensor& targets, LossKind kind) {
  auto losses = per_sample_loss(preds, targets, kind);
  // Ascending order: the sum no longer depends on how samples are arranged.
  std::sort(losses.begin(), losses.end());
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

Tensor loss_gradient(const Tensor& preds, const Tensor& targets, LossKind kind) {
  const std::size_t n = sample_count(preds, targets, "loss_gradient");
  const std::size_t stride = preds.size() / n;
  Tensor g(preds.shape());
  for (std::size_t i = 0; i < n; ++i) {
    double scale = 2.0 / static_cast<double>(n);
    if (kind == LossKind::relative) scale /= target_norm2(targets, i, stride, "loss_gradient");
    for (std::size_t j = i * stride; j < (i + 1) * stride; ++j) g[j] = scale * (preds[j] - targets[j]);
  }
  return g;
}

std::vector<double> relative_errors(const Tensor& outputs, const Tensor& targets) {
  const std::size_t n = sample_count(outputs, targets, "relative_test_error");
  const std::size_t stride = outputs.size() / n;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t2 = target_norm2(targets, i, stride, "relative_test_error");
    out[i] = std::sqrt(squared_distance(outputs.raw() + i * stride, targets.raw() + i * stride, stride)) /
             std::sqrt(t2);
  }
  return out;
}

double relative_test_error(const Tensor& outputs, const Tensor& targets) {
  const auto errors = relative_errors(outputs, targets);
  return std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(errors.size());
}

}  // namespace gitnet
