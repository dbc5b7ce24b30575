#include "gitnet/config.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "gitnet/io.hpp"

namespace gitnet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::size_t parse_positive(const std::string& key, const std::string& v) {
  const auto n = parse_u64(key, v);
  if (n == 0) throw ConfigError("'" + key + "' must be >= 1");
  return n;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || !std::isfinite(out)) {
    throw ConfigError("'" + key + "' expects a finite number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

const std::set<std::string> kRequired = {"problem", "seed", "n_train", "train_data"};

}  // namespace

std::string_view to_string(Problem p) {
  switch (p) {
    case Problem::advection: return "advection";
    case Problem::poisson: return "poisson";
    case Problem::linear: return "linear";
  }
  return "?";
}

std::string_view to_string(ModelKind m) { return m == ModelKind::gitnet ? "gitnet" : "pcanet"; }

std::size_t RunConfig::mesh_size() const {
  if (mesh != 0) return mesh;
  switch (problem) {
    case Problem::advection: return 128;
    case Problem::poisson: return 33;
    case Problem::linear: return 64;
  }
  return 0;
}

void RunConfig::set(const std::string& key, const std::string& v) {
  try {
    if (key == "problem") {
      if (v == "advection") problem = Problem::advection;
      else if (v == "poisson") problem = Problem::poisson;
      else if (v == "linear") problem = Problem::linear;
      else throw ConfigError("'problem' must be advection, poisson or linear, got '" + v + "'");
    } else if (key == "seed") {
      seed = parse_u64(key, v);
      train.seed = seed;
    } else if (key == "n_train") {
      n_train = parse_positive(key, v);
    } else if (key == "n_test") {
      n_test = parse_u64(key, v);
    } else if (key == "mesh") {
      mesh = parse_positive(key, v);
    } else if (key == "rank") {
      rank = parse_positive(key, v);
    } else if (key == "noise") {
      noise = parse_double(key, v);
      if (noise < 0.0) throw ConfigError("'noise' must be >= 0");
    } else if (key == "model") {
      if (v == "gitnet") model = ModelKind::gitnet;
      else if (v == "pcanet") model = ModelKind::pcanet;
      else throw ConfigError("'model' must be gitnet or pcanet, got '" + v + "'");
    } else if (key == "C") {
      channels = parse_positive(key, v);
    } else if (key == "K") {
      modes = parse_positive(key, v);
    } else if (key == "L") {
      layers = parse_positive(key, v);
    } else if (key == "variant") {
      variant = parse_variant(v);
    } else if (key == "activation") {
      activation = parse_activation(v);
    } else if (key == "pcanet_width") {
      pcanet_width = parse_positive(key, v);
    } else if (key == "pcanet_layers") {
      pcanet_layers = parse_positive(key, v);
    } else if (key == "energy_threshold") {
      energy_threshold = parse_double(key, v);
      if (!(energy_threshold > 0.0 && energy_threshold <= 1.0)) throw ConfigError("'energy_threshold' must lie in (0, 1]");
    } else if (key == "p_cap") {
      p_cap = parse_positive(key, v);
    } else if (key == "epochs") {
      train.epochs = parse_positive(key, v);
    } else if (key == "batch_size") {
      train.batch_size = parse_positive(key, v);
    } else if (key == "lr") {
      train.lr = parse_double(key, v);
      if (train.lr < 0.0) throw ConfigError("'lr' must be >= 0");
    } else if (key == "beta1") {
      train.beta1 = parse_double(key, v);
    } else if (key == "beta2") {
      train.beta2 = parse_double(key, v);
    } else if (key == "eps") {
      train.eps = parse_double(key, v);
    } else if (key == "decay_factor") {
      train.decay_factor = parse_double(key, v);
    } else if (key == "decay_every") {
      train.decay_every = parse_u64(key, v);
    } else if (key == "shuffle") {
      train.shuffle = parse_bool(key, v);
    } else if (key == "loss") {
      train.loss = parse_loss(v);
    } else if (key == "train_data") {
      train_data = v;
    } else if (key == "test_data") {
      test_data = v;
    } else if (key == "checkpoint") {
      checkpoint = v;
    } else if (key == "history") {
      history = v;
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  for (std::size_t lineno = 1; std::getline(in, raw); ++lineno) {
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  for (const auto& key : kRequired) {
    if (!seen.contains(key)) throw ConfigError(origin + ": missing required key '" + key + "'");
  }
  try {
    cfg.train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (cfg.problem == Problem::linear && cfg.rank > cfg.mesh_size()) {
    throw ConfigError(origin + ": 'rank' exceeds the mesh size");
  }
  if (cfg.problem == Problem::advection && cfg.mesh_size() % 2 != 0) {
    throw ConfigError(origin + ": advection 'mesh' must be even");
  }
  if (cfg.problem == Problem::poisson && cfg.mesh_size() < 3) {
    throw ConfigError(origin + ": poisson 'mesh' must be >= 3");
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig cfg = parse_run_config(read_file(path), path.string());
  const auto base = path.parent_path();
  auto rebase = [&](std::filesystem::path& p) {
    if (p.is_relative()) p = base / p;
  };
  rebase(cfg.train_data);
  if (cfg.test_data) rebase(*cfg.test_data);
  rebase(cfg.checkpoint);
  rebase(cfg.history);
  return cfg;
}

}  // namespace gitnet
