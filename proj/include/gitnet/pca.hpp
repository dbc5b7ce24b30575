#pragma once

#include <cstddef>
#include <cstdint>

#include "gitnet/tensor.hpp"

namespace gitnet {

inline constexpr double kDefaultEnergyThreshold = 0.99999;
inline constexpr std::size_t kDefaultPcaCap = 200;
/// fit_pca switches to the randomized SVD above this many sample entries.
inline constexpr std::size_t kRandomizedPcaThreshold = 4'000'000;

/// Truncated PCA basis of discretised functions on a fixed mesh.
///
/// `components` holds one orthonormal basis function per row. Coefficients
/// of a function are its Euclidean inner products with the rows after the
/// mean has been subtracted.
struct PcaBasis {
  std::size_t n_points = 0;
  Tensor mean;             ///< [N]
  Tensor components;       ///< [P×N], orthonormal rows
  Tensor singular_values;  ///< [P], nonincreasing
  /// Σ_{k>P} s_k² over the spectrum seen at fit time (0 if unknown).
  double tail_energy = 0.0;
  double energy_threshold = kDefaultEnergyThreshold;
  std::size_t p_cap = kDefaultPcaCap;
  bool centered = true;
  /// Set when the training data had zero variance; the single component is
  /// then an arbitrary unit vector.
  bool degenerate = false;

  std::size_t size() const noexcept { return components.empty() ? 0 : components.rows(); }
};

struct PcaOptions {
  double energy_threshold = kDefaultEnergyThreshold;
  std::size_t p_cap = kDefaultPcaCap;
  bool center = true;
  std::uint64_t seed = 0;
};

/// Fits a basis to the rows of `samples` [M×N]. Multi-channel functions are
/// passed with each channel as its own row so all channels share one basis.
PcaBasis fit_pca(const Tensor& samples, const PcaOptions& options = {});

/// Coefficients α[c,k] = ⟨f[c,·] − mean, e_k⟩ for f[d×N]; returns [d×P].
Tensor encode(const PcaBasis& basis, const Tensor& f);
/// f[c,·] = mean + Σ_k α[c,k]·e_k for α[d×P]; returns [d×N].
Tensor decode(const PcaBasis& basis, const Tensor& alpha);

/// Throws ShapeError/NumericError unless the basis is internally consistent.
void validate(const PcaBasis& basis);

}  // namespace gitnet
