#pragma once

#include <string_view>
#include <vector>

#include "gitnet/tensor.hpp"

namespace gitnet {

enum class LossKind { absolute_mse, relative };

std::string_view to_string(LossKind k);
LossKind parse_loss(std::string_view s);

/// Per-sample squared errors ‖pred_i − target_i‖², divided by ‖target_i‖²
/// for the relative kind. The leading extent indexes samples.
std::vector<double> per_sample_loss(const Tensor& preds, const Tensor& targets, LossKind kind);

/// Mean of per_sample_loss over samples, reduced in ascending order so the
/// value is exactly invariant to sample order.
double empirical_loss(const Tensor& preds, const Tensor& targets, LossKind kind);

/// ∂empirical_loss/∂preds.
Tensor loss_gradient(const Tensor& preds, const Tensor& targets, LossKind kind);

/// ‖out_i − target_i‖ / ‖target_i‖ per sample (plain norms, not squared).
std::vector<double> relative_errors(const Tensor& outputs, const Tensor& targets);

/// Mean of relative_errors.
double relative_test_error(const Tensor& outputs, const Tensor& targets);

}  // namespace gitnet
