#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gitnet/gitnet.hpp"
#include "gitnet/pca.hpp"
#include "gitnet/tensor.hpp"

namespace gitnet {

/// PCA-Net baseline: a fully connected network between flattened PCA
/// coefficient vectors, y = act(x·W + b) per layer, linear on the last layer.
struct PcaNetParams {
  std::size_t d_in = 1, d_out = 1, p_u = 1, p_v = 1;
  /// widths.front() == d_in·P_u, widths.back() == d_out·P_v.
  std::vector<std::size_t> widths;
  std::vector<Tensor> weights;  ///< weights[l] is [widths[l] × widths[l+1]]
  std::vector<Tensor> biases;   ///< biases[l] is [widths[l+1]]
  Activation activation = Activation::relu;

  friend bool operator==(const PcaNetParams&, const PcaNetParams&) = default;
};

using PcaNetGrads = PcaNetParams;

/// Widths for `layers` linear maps with equal hidden width.
std::vector<std::size_t> pcanet_widths(std::size_t d_in, std::size_t p_u, std::size_t d_out, std::size_t p_v,
                                       std::size_t hidden_width, std::size_t layers = 4);

/// Glorot-uniform weights, zero biases.
PcaNetParams init_pcanet(std::size_t d_in, std::size_t p_u, std::size_t d_out, std::size_t p_v,
                         std::vector<std::size_t> widths, std::uint64_t seed,
                         Activation activation = Activation::relu);

std::vector<Tensor*> parameter_tensors(PcaNetParams& m);
std::vector<const Tensor*> parameter_tensors(const PcaNetParams& m);
std::size_t parameter_count(const PcaNetParams& m);
PcaNetParams zeros_like(const PcaNetParams& m);
void validate(const PcaNetParams& m);

/// MLP on flattened coefficients x[B × d_in·P_u]; returns [B × d_out·P_v].
Tensor pcanet_coefficients(const PcaNetParams& m, const Tensor& x);

Tensor pcanet_forward(const PcaNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v, const Tensor& f);
Tensor pcanet_forward_batch(const PcaNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v,
                            const Tensor& f);

}  // namespace gitnet
