#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gitnet/pca.hpp"
#include "gitnet/tensor.hpp"

namespace gitnet {

enum class Activation : std::uint8_t { gelu = 0, identity = 1, relu = 2 };

/// Where the nonlinearity sits in a layer.
///  - standard:     act(T·α + K·α)
///  - pre_residual: T·α + act(K·α)
enum class Variant : std::uint8_t { standard = 0, pre_residual = 1 };

std::string_view to_string(Activation a);
std::string_view to_string(Variant v);
Activation parse_activation(std::string_view s);
Variant parse_variant(std::string_view s);

/// Applies `a` elementwise; identity returns the input unchanged.
Tensor activate(Activation a, const Tensor& x);
/// Elementwise derivative of `a` evaluated at x.
Tensor activate_grad(Activation a, const Tensor& x);

/// One generalized integral transform layer acting on C×K coefficient arrays.
/// K·α = ((α·P) ⊗ D)·Q where ⊗ mixes channels separately for every frequency.
struct GitLayerParams {
  Tensor t;  ///< [C×C] channel skip
  Tensor p;  ///< [K×K] first change of basis
  Tensor d;  ///< [C×C×K], d(d_in, c_out, k)
  Tensor q;  ///< [K×K] second change of basis
  Activation activation = Activation::gelu;

  friend bool operator==(const GitLayerParams&, const GitLayerParams&) = default;
};

/// Architecture sizes of a GIT-Net.
struct GitNetShape {
  std::size_t d_in = 1;
  std::size_t d_out = 1;
  std::size_t p_u = 1;  ///< input PCA size
  std::size_t p_v = 1;  ///< output PCA size
  std::size_t channels = 1;  ///< C
  std::size_t modes = 1;     ///< K
  std::size_t layers = 3;    ///< L

  friend bool operator==(const GitNetShape&, const GitNetShape&) = default;
};

/// Full operator: lift, L GIT layers, project. PCA bases are held separately.
struct GitNetParams {
  GitNetShape shape;
  Tensor lift_left;    ///< [C×d_in]
  Tensor lift_right;   ///< [P_u×K]
  std::vector<GitLayerParams> layers;
  Tensor proj_left;    ///< [d_out×C]
  Tensor proj_right;   ///< [K×P_v]
  Variant variant = Variant::standard;

  friend bool operator==(const GitNetParams&, const GitNetParams&) = default;
};

/// Gradients share the parameter layout.
using GitNetGrads = GitNetParams;

/// Parameter arrays in canonical order: lift_left, lift_right, then
/// (t, p, d, q) per layer, then proj_left, proj_right.
std::vector<Tensor*> parameter_tensors(GitNetParams& m);
std::vector<const Tensor*> parameter_tensors(const GitNetParams& m);
std::size_t parameter_count(const GitNetParams& m);

/// Copy of `m` with every parameter entry set to zero.
GitNetParams zeros_like(const GitNetParams& m);

/// Throws ShapeError/NumericError when sizes are inconsistent, an entry is
/// non-finite, L = 0, or the last layer is not linear.
void validate(const GitNetParams& m);

/// out[c,k] = Σ_d D[d,c,k]·α[d,k]; α is [C×K] or a batch [B×C×K].
Tensor hybrid_product(const Tensor& alpha, const Tensor& d);

/// One layer on α[C×K] (or a batch [B×C×K]).
Tensor git_layer_forward(const GitLayerParams& p, const Tensor& alpha, Variant variant);

/// L↑·α·R↑ for α[d_in×P_u] (or [B×d_in×P_u]); returns [C×K] (or [B×C×K]).
Tensor lift(const GitNetParams& m, const Tensor& alpha);
/// L↓·z·R↓ for z[C×K] (or [B×C×K]); returns [d_out×P_v] (or [B×d_out×P_v]).
Tensor project(const GitNetParams& m, const Tensor& z);

/// Coefficient-space operator: project ∘ G_L ∘ … ∘ G_1 ∘ lift.
Tensor gitnet_coefficients(const GitNetParams& m, const Tensor& alpha);

/// decode_v(project(G_L(…G_1(lift(encode_u(f)))…))) for f[d_in×N_u].
Tensor gitnet_forward(const GitNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v, const Tensor& f);
/// Batched forward over f[B×d_in×N_u]; returns [B×d_out×N_v]. Each sample is
/// bit-identical to the corresponding single-sample forward.
Tensor gitnet_forward_batch(const GitNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v,
                            const Tensor& f);

/// Scalars in one layer: 2K² + KC² for the transform plus C² for T.
constexpr std::size_t param_count_layer(std::size_t channels, std::size_t modes) noexcept {
  return 2 * modes * modes + modes * channels * channels + channels * channels;
}

/// C·d_in + P_u·K + L·(2K²+KC²+C²) + d_out·C + K·P_v.
constexpr std::size_t param_count(const GitNetShape& s) noexcept {
  return s.channels * s.d_in + s.p_u * s.modes + s.layers * param_count_layer(s.channels, s.modes) +
         s.d_out * s.channels + s.modes * s.p_v;
}

/// Glorot-uniform initialisation, deterministic in `seed`. Layers before the
/// last use `hidden`; the last layer is always linear. Each frequency slice
/// D[:,:,k] is drawn with fans (C, C).
GitNetParams init_params(const GitNetShape& shape, Variant variant, std::uint64_t seed,
                         Activation hidden = Activation::gelu);

}  // namespace gitnet
