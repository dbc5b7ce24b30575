#include "gitnet/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gitnet/grad.hpp"
#include "gitnet/rng.hpp"

namespace gitnet {

AdamState make_adam(const std::vector<const Tensor*>& params, double lr, double beta1, double beta2, double eps) {
  AdamState s;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  for (const Tensor* p : params) {
    s.m.emplace_back(p->shape());
    s.v.emplace_back(p->shape());
  }
  return s;
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads, AdamState& s) {
  if (params.size() != grads.size() || params.size() != s.m.size() || params.size() != s.v.size()) {
    throw ShapeError("adam_step: parameter, gradient and moment lists differ in length");
  }
  for (std::size_t a = 0; a < params.size(); ++a) {
    if (params[a]->shape() != grads[a]->shape() || s.m[a].shape() != params[a]->shape() ||
        s.v[a].shape() != params[a]->shape()) {
      throw ShapeError("adam_step: shape mismatch in array " + std::to_string(a) + ": parameter " +
                       shape_string(params[a]->shape()) + ", gradient " + shape_string(grads[a]->shape()));
    }
    const Tensor& g = *grads[a];
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw NumericError("adam_step: non-finite gradient in array " + std::to_string(a) + " at entry " +
                           std::to_string(i));
      }
    }
  }
  ++s.t;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (std::size_t a = 0; a < params.size(); ++a) {
    Tensor& p = *params[a];
    const Tensor& g = *grads[a];
    Tensor& m = s.m[a];
    Tensor& v = s.v[a];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
    }
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("TrainConfig: lr must be finite and >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("TrainConfig: beta1 and beta2 must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("TrainConfig: eps must be positive");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    throw std::invalid_argument("TrainConfig: decay_factor must lie in (0, 1]");
  }
}

double TrainConfig::lr_at(std::size_t epoch) const {
  const std::size_t every = decay_every != 0 ? decay_every : (epochs + 3) / 4;
  const std::size_t steps = epoch == 0 ? 0 : (epoch - 1) / every;
  return lr * std::pow(decay_factor, static_cast<double>(steps));
}

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch, bool shuffle) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!shuffle) return order;
  // Fisher-Yates with an explicit reduction so the order does not depend on
  // the standard library's distribution implementation.
  Rng rng(splitmix64(seed ^ splitmix64(epoch)));
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

Tensor gather_samples(const Tensor& batch, std::span<const std::size_t> indices) {
  if (batch.rank() == 0) throw ShapeError("gather_samples: scalar tensor");
  const std::size_t n = batch.extent(0);
  const std::size_t stride = n == 0 ? 0 : batch.size() / n;
  Shape shape = batch.shape();
  shape[0] = indices.size();
  Tensor out(shape);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    if (indices[b] >= n) throw ShapeError("gather_samples: index " + std::to_string(indices[b]) + " out of range");
    std::copy_n(batch.raw() + indices[b] * stride, stride, out.raw() + b * stride);
  }
  return out;
}

namespace {

Tensor forward_all(const GitNetParams& m, const PcaBasis& bu, const PcaBasis& bv, const Tensor& f) {
  return gitnet_forward_batch(m, bu, bv, f);
}
Tensor forward_all(const PcaNetParams& m, const PcaBasis& bu, const PcaBasis& bv, const Tensor& f) {
  return pcanet_forward_batch(m, bu, bv, f);
}

template <class Model>
double test_error(const Model& m, const PcaBasis& bu, const PcaBasis& bv, const Dataset* test) {
  if (test == nullptr || test->size() == 0) return std::numeric_limits<double>::quiet_NaN();
  return relative_test_error(forward_all(m, bu, bv, test->inputs), test->outputs);
}

void check_data(const Dataset& data, const PcaBasis& bu, const PcaBasis& bv, std::size_t d_in, std::size_t d_out,
                const char* which) {
  data.validate();
  if (data.d_in() != d_in || data.n_points_in() != bu.n_points || data.d_out() != d_out ||
      data.n_points_out() != bv.n_points) {
    throw ShapeError(std::string("train: ") + which + " set shapes " + shape_string(data.inputs.shape()) + " -> " +
                     shape_string(data.outputs.shape()) + " do not match the model");
  }
}

std::size_t model_d_in(const GitNetParams& m) { return m.shape.d_in; }
std::size_t model_d_out(const GitNetParams& m) { return m.shape.d_out; }
std::size_t model_d_in(const PcaNetParams& m) { return m.d_in; }
std::size_t model_d_out(const PcaNetParams& m) { return m.d_out; }

template <class Model>
TrainResult<Model> train_impl(const Model& model, const PcaBasis& bu, const PcaBasis& bv, const Dataset& train_set,
                              const Dataset* test_set, const TrainConfig& cfg) {
  cfg.validate();
  validate(model);
  if (train_set.size() == 0) throw std::invalid_argument("train: training set is empty");
  check_data(train_set, bu, bv, model_d_in(model), model_d_out(model), "training");
  if (test_set != nullptr && test_set->size() > 0) {
    check_data(*test_set, bu, bv, model_d_in(model), model_d_out(model), "test");
  }

  TrainResult<Model> result;
  result.final_model = model;
  Model& m = result.final_model;
  result.initial_train_loss =
      empirical_loss(forward_all(m, bu, bv, train_set.inputs), train_set.outputs, cfg.loss);
  result.initial_test_error = test_error(m, bu, bv, test_set);
  result.best_model = m;
  double best = std::numeric_limits<double>::infinity();

  const auto const_params = parameter_tensors(std::as_const(m));
  AdamState adam = make_adam(const_params, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
  const auto params = parameter_tensors(m);
  const std::size_t n = train_set.size();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    adam.lr = cfg.lr_at(epoch);
    const auto order = epoch_permutation(n, cfg.seed, epoch, cfg.shuffle);
    double loss_sum = 0.0;
    for (std::size_t start = 0, batch_index = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(cfg.batch_size, n - start));
      const Tensor f = gather_samples(train_set.inputs, idx);
      const Tensor g = gather_samples(train_set.outputs, idx);
      const auto fwd = forward_with_tape(m, bu, bv, f);
      const auto losses = per_sample_loss(fwd.predictions, g, cfg.loss);
      double batch_sum = 0.0;
      for (double l : losses) batch_sum += l;
      if (!std::isfinite(batch_sum)) {
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
      }
      loss_sum += batch_sum;
      const auto grads = backward(m, bv, fwd.tape, loss_gradient(fwd.predictions, g, cfg.loss));
      adam_step(params, parameter_tensors(grads), adam);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.test_rel_error = test_error(m, bu, bv, test_set);
    rec.lr = adam.lr;
    result.history.push_back(rec);
    const double score = std::isnan(rec.test_rel_error) ? rec.train_loss : rec.test_rel_error;
    if (score < best) {
      best = score;
      result.best_model = m;
      result.best_epoch = epoch;
    }
  }
  if (test_set == nullptr || test_set->size() == 0) {
    result.best_model = m;
    result.best_epoch = cfg.epochs;
  }
  return result;
}

}  // namespace

TrainResult<GitNetParams> train(const GitNetParams& model, const PcaBasis& basis_u, const PcaBasis& basis_v,
                                const Dataset& train_set, const Dataset* test_set, const TrainConfig& cfg) {
  return train_impl(model, basis_u, basis_v, train_set, test_set, cfg);
}

TrainResult<PcaNetParams> train(const PcaNetParams& model, const PcaBasis& basis_u, const PcaBasis& basis_v,
                                const Dataset& train_set, const Dataset* test_set, const TrainConfig& cfg) {
  return train_impl(model, basis_u, basis_v, train_set, test_set, cfg);
}

}  // namespace gitnet
