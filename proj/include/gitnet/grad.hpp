#pragma once

#include <vector>

#include "gitnet/gitnet.hpp"
#include "gitnet/loss.hpp"
#include "gitnet/pca.hpp"
#include "gitnet/pcanet.hpp"
#include "gitnet/tensor.hpp"

namespace gitnet {

/// Forward intermediates of one GIT layer for a batch, all [B×C×K].
struct LayerTape {
  Tensor input;           ///< α entering the layer
  Tensor basis_changed;   ///< α·P
  Tensor mixed;           ///< (α·P) ⊗ D
  Tensor pre_activation;  ///< argument of the activation
};

/// Everything backward() needs from a batched GIT-Net forward pass.
struct GradTape {
  std::size_t batch = 0;
  Tensor coefficients;  ///< encoded inputs [B×d_in×P_u]
  Tensor lifted_left;   ///< L↑·α [B×C×P_u]
  std::vector<LayerTape> layers;
  Tensor projected_in;    ///< last layer output [B×C×K]
  Tensor projected_left;  ///< L↓·z [B×d_out×K]
};

struct TapedForward {
  Tensor predictions;  ///< [B×d_out×N_v]
  GradTape tape;
};

/// Batched forward over f[B×d_in×N_u]. Predictions are bit-identical to
/// gitnet_forward_batch.
TapedForward forward_with_tape(const GitNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v,
                               const Tensor& f);

/// Reverse pass: gradient of a scalar loss with respect to every parameter,
/// accumulated over the batch, given ∂loss/∂predictions [B×d_out×N_v].
/// The PCA bases are constants.
GitNetGrads backward(const GitNetParams& m, const PcaBasis& basis_v, const GradTape& tape,
                     const Tensor& d_predictions);

struct PcaNetTape {
  std::size_t batch = 0;
  std::vector<Tensor> inputs;           ///< input of each linear map [B×w_l]
  std::vector<Tensor> pre_activations;  ///< hidden pre-activations [B×w_{l+1}]
};

struct PcaNetTapedForward {
  Tensor predictions;
  PcaNetTape tape;
};

PcaNetTapedForward forward_with_tape(const PcaNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v,
                                     const Tensor& f);
PcaNetGrads backward(const PcaNetParams& m, const PcaBasis& basis_v, const PcaNetTape& tape,
                     const Tensor& d_predictions);

/// Central-difference audit of backward(): every scalar parameter is moved by
/// ±h, the loss is recomputed, and (L(+h) − L(−h))/(2h) is compared with the
/// analytic entry. Returns max |a − n| / max(|a|, |n|, 1e-12).
double finite_diff_check(const GitNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v,
                         const Tensor& f_batch, const Tensor& g_batch, double h,
                         LossKind loss = LossKind::absolute_mse);

}  // namespace gitnet
