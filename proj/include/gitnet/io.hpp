#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "gitnet/gitnet.hpp"
#include "gitnet/pca.hpp"
#include "gitnet/pcanet.hpp"
#include "gitnet/pdedata.hpp"

namespace gitnet {

/// File missing, unreadable, truncated or with a bad header.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// OPDS1 layout, all little-endian:
///   "OPDS" u8 version=1, u32 N, d_in, n_pts_u, d_out, n_pts_v, u64 seed,
///   zero padding to 40 bytes, then inputs and outputs as f64 in
///   [sample][channel][point] order.
inline constexpr std::size_t kOpdsHeaderBytes = 40;

std::string dataset_to_bytes(const Dataset& ds);
Dataset dataset_from_bytes(const std::string& bytes);
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);

/// Trained model together with the bases it was fitted with.
struct Checkpoint {
  PcaBasis basis_u;
  PcaBasis basis_v;
  std::variant<GitNetParams, PcaNetParams> model;
};

/// GITN1 layout, all little-endian:
///   "GITN" u8 version=1, u8 architecture (0 GIT-Net, 1 PCA-Net), then
///   GIT-Net:  u32 d_in, d_out, P_u, P_v, C, K, L, u8 variant, u8 activation per layer
///   PCA-Net:  u32 d_in, d_out, P_u, P_v, n_widths, widths…, u8 activation
///   then both bases (u32 N, u32 P, u8 centered, u8 degenerate, u32 p_cap,
///   f64 energy_threshold, f64 tail_energy, mean[N], singular values[P],
///   components[P×N]) and every parameter array as f64 in canonical order.
std::string checkpoint_to_bytes(const Checkpoint& c);
Checkpoint checkpoint_from_bytes(const std::string& bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Creates missing parent directories.
void write_file(const std::filesystem::path& path, const std::string& bytes);

/// %.17g, which round-trips every double.
std::string format_double(double x);

}  // namespace gitnet
