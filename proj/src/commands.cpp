#include "gitnet/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gitnet {

namespace {

Tensor channel_rows(const Tensor& t) { return t.reshaped({t.extent(0) * t.extent(1), t.extent(2)}); }

// Basis of the right size for cost evaluation when no data is at hand.
PcaBasis placeholder_basis(std::size_t n_points, std::size_t p) {
  PcaBasis b;
  b.n_points = n_points;
  b.mean = Tensor({n_points});
  b.components = Tensor({p, n_points});
  b.singular_values = Tensor({p}, 1.0);
  return b;
}

}  // namespace

Dataset generate_problem(const RunConfig& cfg) {
  const std::size_t n = cfg.n_train + cfg.n_test;
  const std::size_t mesh = cfg.mesh_size();
  switch (cfg.problem) {
    case Problem::advection: return advection_dataset(Mesh1D{mesh}, n, cfg.seed);
    case Problem::poisson: return poisson_dataset(Mesh2D{mesh, mesh}, n, cfg.seed);
    case Problem::linear: return linear_operator_dataset(mesh, mesh, cfg.rank, n, cfg.noise, cfg.seed).data;
  }
  throw ConfigError("unknown problem");
}

SplitData split_dataset(const Dataset& all, std::size_t n_train) {
  if (n_train > all.size()) throw ShapeError("split_dataset: n_train exceeds the dataset size");
  return {all.slice(0, n_train), all.slice(n_train, all.size())};
}

std::string cmd_generate(const RunConfig& cfg) {
  const Dataset all = generate_problem(cfg);
  const SplitData split = split_dataset(all, cfg.n_train);
  write_dataset(cfg.train_data, split.train);
  std::ostringstream os;
  os << to_string(cfg.problem) << ": " << split.train.size() << " train samples, inputs "
     << shape_string(split.train.inputs.shape()) << ", outputs " << shape_string(split.train.outputs.shape())
     << ", seed " << cfg.seed << " -> " << cfg.train_data.string();
  if (cfg.n_test > 0) {
    if (!cfg.test_data) throw ConfigError("n_test > 0 requires 'test_data'");
    write_dataset(*cfg.test_data, split.test);
    os << "; " << split.test.size() << " test samples -> " << cfg.test_data->string();
  }
  return os.str();
}

PcaBasis fit_basis(const Tensor& samples, const RunConfig& cfg) {
  PcaOptions opt;
  opt.energy_threshold = cfg.energy_threshold;
  opt.p_cap = cfg.p_cap;
  opt.seed = cfg.seed;
  return fit_pca(channel_rows(samples), opt);
}

Checkpoint initial_checkpoint(const RunConfig& cfg, const Dataset& train) {
  Checkpoint c;
  c.basis_u = fit_basis(train.inputs, cfg);
  c.basis_v = fit_basis(train.outputs, cfg);
  const std::size_t d_in = train.d_in(), d_out = train.d_out();
  if (cfg.model == ModelKind::gitnet) {
    GitNetShape s;
    s.d_in = d_in;
    s.d_out = d_out;
    s.p_u = c.basis_u.size();
    s.p_v = c.basis_v.size();
    s.channels = cfg.channels;
    s.modes = cfg.modes;
    s.layers = cfg.layers;
    c.model = init_params(s, cfg.variant, cfg.seed, cfg.activation);
  } else {
    const auto widths =
        pcanet_widths(d_in, c.basis_u.size(), d_out, c.basis_v.size(), cfg.pcanet_width, cfg.pcanet_layers);
    const Activation act = cfg.activation == Activation::gelu ? Activation::relu : cfg.activation;
    c.model = init_pcanet(d_in, c.basis_u.size(), d_out, c.basis_v.size(), widths, cfg.seed, act);
  }
  return c;
}

TrainSummary train_checkpoint(Checkpoint& ckpt, const RunConfig& cfg, const Dataset& train_set, const Dataset* test) {
  TrainSummary summary;
  summary.p_u = ckpt.basis_u.size();
  summary.p_v = ckpt.basis_v.size();
  std::visit(
      [&](auto& model) {
        auto result = train(model, ckpt.basis_u, ckpt.basis_v, train_set, test, cfg.train);
        model = std::move(result.final_model);
        summary.history = std::move(result.history);
        summary.initial_train_loss = result.initial_train_loss;
        summary.parameters = parameter_count(model);
      },
      ckpt.model);
  summary.final_test_error =
      summary.history.empty() ? std::numeric_limits<double>::quiet_NaN() : summary.history.back().test_rel_error;
  return summary;
}

TrainSummary cmd_train(const RunConfig& cfg) {
  const Dataset train_set = read_dataset(cfg.train_data);
  Dataset test_set;
  const bool has_test = cfg.test_data.has_value();
  if (has_test) test_set = read_dataset(*cfg.test_data);
  Checkpoint ckpt = initial_checkpoint(cfg, train_set);
  TrainSummary summary = train_checkpoint(ckpt, cfg, train_set, has_test ? &test_set : nullptr);
  save_checkpoint(cfg.checkpoint, ckpt);
  write_file(cfg.history, history_csv(summary.history));
  return summary;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,test_rel_error,lr\n";
  for (const auto& r : history) {
    out += std::to_string(r.epoch) + ',' + format_double(r.train_loss) + ',' + format_double(r.test_rel_error) +
           ',' + format_double(r.lr) + '\n';
  }
  return out;
}

Tensor predict(const Checkpoint& ckpt, const Tensor& inputs) {
  return std::visit(
      [&](const auto& model) -> Tensor {
        using M = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<M, GitNetParams>) {
          return gitnet_forward_batch(model, ckpt.basis_u, ckpt.basis_v, inputs);
        } else {
          return pcanet_forward_batch(model, ckpt.basis_u, ckpt.basis_v, inputs);
        }
      },
      ckpt.model);
}

EvalReport evaluate(const Checkpoint& ckpt, const Dataset& data) {
  data.validate();
  if (data.size() == 0) throw ShapeError("evaluate: empty dataset");
  if (data.n_points_in() != ckpt.basis_u.n_points || data.n_points_out() != ckpt.basis_v.n_points) {
    throw ShapeError("evaluate: dataset mesh sizes (" + std::to_string(data.n_points_in()) + ", " +
                     std::to_string(data.n_points_out()) + ") do not match the checkpoint (" +
                     std::to_string(ckpt.basis_u.n_points) + ", " + std::to_string(ckpt.basis_v.n_points) + ")");
  }
  EvalReport r;
  r.errors = relative_errors(predict(ckpt, data.inputs), data.outputs);
  std::vector<double> sorted = r.errors;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  r.min = sorted.front();
  r.max = sorted.back();
  r.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  double sum = 0.0;
  for (double e : r.errors) sum += e;
  r.mean = sum / static_cast<double>(n);
  return r;
}

std::string errors_csv(const std::vector<double>& errors) {
  std::string out = "sample,rel_error\n";
  for (std::size_t i = 0; i < errors.size(); ++i) out += std::to_string(i) + ',' + format_double(errors[i]) + '\n';
  return out;
}

std::string cmd_flops(const RunConfig& cfg, bool instrument) {
  const std::size_t mesh = cfg.mesh_size();
  std::size_t n_in = mesh, n_out = mesh, d_in = 1, d_out = 1;
  if (cfg.problem == Problem::poisson) {
    const Mesh2D m{mesh, mesh};
    n_in = m.boundary_size();
    n_out = m.interior_size();
  }
  const std::size_t p_u = std::min(cfg.p_cap, n_in), p_v = std::min(cfg.p_cap, n_out);

  GitNetShape s{d_in, d_out, p_u, p_v, cfg.channels, cfg.modes, cfg.layers};
  const GitNetParams git = init_params(s, cfg.variant, cfg.seed, cfg.activation);
  const auto widths = pcanet_widths(d_in, p_u, d_out, p_v, cfg.pcanet_width, cfg.pcanet_layers);
  const PcaNetParams mlp = init_pcanet(d_in, p_u, d_out, p_v, widths, cfg.seed);
  const PcaBasis bu = placeholder_basis(n_in, p_u), bv = placeholder_basis(n_out, p_v);

  std::ostringstream os;
  os << cost_csv_header(instrument) << '\n';
  auto row = [&](const CostReport& r, std::optional<std::uint64_t> measured) {
    os << cost_csv_row(r, instrument ? measured : std::nullopt);
    if (instrument && !measured) os << ',';
    os << '\n';
  };
  row(flops_gitnet_exact(git, n_in, n_out), instrumented_flops(git, bu, bv));
  row(flops_pcanet_exact(n_in, d_in, d_out, p_u, p_v, widths, mlp.activation), instrumented_flops(mlp, bu, bv));
  row(scaling_report("fno", flops_fno_scaling(n_out, cfg.channels, cfg.layers, cfg.modes), n_out, cfg.channels,
                     cfg.modes, cfg.layers),
      std::nullopt);
  row(scaling_report("pod_deeponet", flops_pod_deeponet_scaling(n_out, cfg.channels, cfg.modes, cfg.layers), n_out,
                     cfg.channels, cfg.modes, cfg.layers),
      std::nullopt);
  return os.str();
}

}  // namespace gitnet
