#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gitnet/gitnet.hpp"
#include "gitnet/loss.hpp"
#include "gitnet/pca.hpp"
#include "gitnet/pcanet.hpp"
#include "gitnet/pdedata.hpp"
#include "gitnet/tensor.hpp"

namespace gitnet {

/// ADAM moments and hyperparameters. m and v match the parameter list
/// passed to make_adam entry for entry.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState make_adam(const std::vector<const Tensor*>& params, double lr = 1e-3, double beta1 = 0.9,
                    double beta2 = 0.999, double eps = 1e-8);

/// One bias-corrected ADAM update, in place. Throws NumericError naming the
/// array and entry if a gradient is not finite; nothing is modified then.
void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads, AdamState& state);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  bool shuffle = true;
  LossKind loss = LossKind::absolute_mse;
  /// Learning rate is multiplied by decay_factor every decay_every epochs;
  /// 0 means ⌈epochs/4⌉.
  double decay_factor = 0.5;
  std::size_t decay_every = 0;

  void validate() const;
  /// Learning rate in force during `epoch` (1-based).
  double lr_at(std::size_t epoch) const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  /// Mean per-sample loss over the epoch's minibatches, as seen before
  /// each batch's update.
  double train_loss = 0.0;
  /// Mean relative test error after the epoch; NaN without a test set.
  double test_rel_error = 0.0;
  double lr = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

template <class Model>
struct TrainResult {
  Model final_model;
  /// Snapshot with the lowest test error (the final one without a test set).
  Model best_model;
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> history;
  double initial_train_loss = 0.0;
  double initial_test_error = 0.0;
};

/// Minibatch ADAM on `train_set`. Shuffling uses a permutation seeded from
/// (cfg.seed, epoch), so the run is a deterministic function of its inputs.
/// `test_set` may be null; it is only ever read for the reported errors.
TrainResult<GitNetParams> train(const GitNetParams& model, const PcaBasis& basis_u, const PcaBasis& basis_v,
                                const Dataset& train_set, const Dataset* test_set, const TrainConfig& cfg);
TrainResult<PcaNetParams> train(const PcaNetParams& model, const PcaBasis& basis_u, const PcaBasis& basis_v,
                                const Dataset& train_set, const Dataset* test_set, const TrainConfig& cfg);

/// Order in which an epoch visits the samples.
std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch, bool shuffle);

/// Samples `indices` of `batch` [N×…] stacked into a new tensor.
Tensor gather_samples(const Tensor& batch, std::span<const std::size_t> indices);

}  // namespace gitnet
