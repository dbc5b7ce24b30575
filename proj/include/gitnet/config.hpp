#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "gitnet/gitnet.hpp"
#include "gitnet/loss.hpp"
#include "gitnet/train.hpp"

namespace gitnet {

/// Invalid, unknown or missing configuration entries.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Problem { advection, poisson, linear };
enum class ModelKind { gitnet, pcanet };

std::string_view to_string(Problem p);
std::string_view to_string(ModelKind m);

/// Run description read from `key = value` lines; `#` starts a comment.
/// `problem`, `seed`, `n_train` and `train_data` are required.
struct RunConfig {
  Problem problem = Problem::advection;
  std::uint64_t seed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  /// Points per side: periodic grid size (advection), square side (poisson),
  /// input and output length (linear). 0 picks 128, 33 or 64.
  std::size_t mesh = 0;
  std::size_t rank = 8;     ///< linear only
  double noise = 0.0;       ///< linear only

  ModelKind model = ModelKind::gitnet;
  std::size_t channels = 8;
  std::size_t modes = 64;
  std::size_t layers = 3;
  Variant variant = Variant::standard;
  Activation activation = Activation::gelu;
  std::size_t pcanet_width = 128;
  std::size_t pcanet_layers = 4;

  double energy_threshold = 0.99999;
  std::size_t p_cap = 200;

  TrainConfig train;

  std::filesystem::path train_data;
  std::optional<std::filesystem::path> test_data;
  std::filesystem::path checkpoint = "model.gitn";
  std::filesystem::path history = "history.csv";

  std::size_t mesh_size() const;
  /// Applies one entry; throws ConfigError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
};

/// `origin` prefixes error messages, e.g. a file name.
RunConfig parse_run_config(const std::string& text, const std::string& origin = "config");
/// Relative paths in the file are taken relative to the file's directory.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace gitnet
