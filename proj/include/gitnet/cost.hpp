#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gitnet/gitnet.hpp"
#include "gitnet/pca.hpp"
#include "gitnet/pcanet.hpp"

namespace gitnet {

/// Flops of one forward evaluation by stage. For architectures without PCA
/// stages the whole count sits in `layers`.
struct CostBreakdown {
  std::uint64_t encode = 0;
  std::uint64_t lift = 0;
  std::uint64_t layers = 0;
  std::uint64_t project = 0;
  std::uint64_t decode = 0;

  std::uint64_t total() const noexcept { return encode + lift + layers + project + decode; }
  friend bool operator==(const CostBreakdown&, const CostBreakdown&) = default;
};

struct CostReport {
  std::string architecture;
  std::size_t n_points = 0;
  std::size_t channels = 0;
  std::size_t modes = 0;
  std::size_t layers = 0;
  std::size_t p_u = 0;
  std::size_t p_v = 0;
  std::size_t d_in = 0;
  std::size_t d_out = 0;
  std::uint64_t flops = 0;  ///< always breakdown.total()
  CostBreakdown breakdown;

  friend bool operator==(const CostReport&, const CostReport&) = default;
};

/// Exact count for one sample. Every layer but the last uses `hidden`; the
/// last is linear, as built by init_params.
CostReport flops_gitnet_exact(std::size_t n_points, std::size_t d_in, std::size_t d_out, std::size_t p_u,
                              std::size_t p_v, std::size_t channels, std::size_t modes, std::size_t layers,
                              Activation hidden = Activation::gelu);
CostReport flops_gitnet_exact(const GitNetParams& m, std::size_t n_points_in, std::size_t n_points_out);

/// Exact count for the MLP baseline with `widths` (d_in·P_u, …, d_out·P_v).
/// GELU hidden layers add 15 flops per hidden unit; ReLU is free.
CostReport flops_pcanet_exact(std::size_t n_points, std::size_t d_in, std::size_t d_out, std::size_t p_u,
                              std::size_t p_v, const std::vector<std::size_t>& widths,
                              Activation activation = Activation::relu);

/// Radix-2 FFT budget used by the FNO model.
inline constexpr double kFftFlopsPerPoint = 5.0;

/// L·(2·5·C·N_p·log2(N_p) + 2·N_p·C²). `modes` does not enter the count.
double flops_fno_scaling(std::size_t n_points, std::size_t channels, std::size_t layers, std::size_t modes);

/// L·2·N_p·C² + 2·C·K·N_p + N_p.
double flops_pod_deeponet_scaling(std::size_t n_points, std::size_t channels, std::size_t modes,
                                  std::size_t layers);

/// Wraps an analytic scaling value as a report (rounded to the nearest integer).
CostReport scaling_report(std::string architecture, double flops, std::size_t n_points, std::size_t channels,
                          std::size_t modes, std::size_t layers);

/// Flops charged by the kernels during one single-sample forward evaluation.
std::uint64_t instrumented_flops(const GitNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v);
std::uint64_t instrumented_flops(const PcaNetParams& m, const PcaBasis& basis_u, const PcaBasis& basis_v);

std::string cost_csv_header(bool instrumented);
std::string cost_csv_row(const CostReport& r, std::optional<std::uint64_t> instrumented = std::nullopt);

struct CostCsvRow {
  CostReport report;
  std::optional<std::uint64_t> instrumented;
};
/// Parses text written with cost_csv_header/cost_csv_row. An empty
/// instrumented cell (analytic-only rows) reads back as nullopt.
std::vector<CostCsvRow> parse_cost_csv(const std::string& text);

}  // namespace gitnet
