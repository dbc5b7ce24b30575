#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gitnet/config.hpp"
#include "gitnet/cost.hpp"
#include "gitnet/io.hpp"
#include "gitnet/pdedata.hpp"
#include "gitnet/train.hpp"

namespace gitnet {

/// n_train + n_test samples of the configured problem, in one seeded run so
/// train and test share the operator (linear problem) but not samples.
Dataset generate_problem(const RunConfig& cfg);

struct SplitData {
  Dataset train;
  Dataset test;  ///< empty when n_test = 0
};
SplitData split_dataset(const Dataset& all, std::size_t n_train);

/// Writes train_data (and test_data when n_test > 0). Returns a summary line.
std::string cmd_generate(const RunConfig& cfg);

struct TrainSummary {
  std::vector<EpochRecord> history;
  double initial_train_loss = 0.0;
  double final_test_error = 0.0;  ///< NaN without a test set
  std::size_t p_u = 0, p_v = 0;
  std::size_t parameters = 0;
};

/// Bases from `train` only, then a model built from cfg.
PcaBasis fit_basis(const Tensor& samples, const RunConfig& cfg);
Checkpoint initial_checkpoint(const RunConfig& cfg, const Dataset& train);
/// Trains the checkpoint's model in place.
TrainSummary train_checkpoint(Checkpoint& ckpt, const RunConfig& cfg, const Dataset& train, const Dataset* test);

/// Reads the datasets, trains, writes the checkpoint (final snapshot) and the history CSV.
TrainSummary cmd_train(const RunConfig& cfg);

std::string history_csv(const std::vector<EpochRecord>& history);

struct EvalReport {
  std::vector<double> errors;
  double mean = 0.0, min = 0.0, median = 0.0, max = 0.0;
};

Tensor predict(const Checkpoint& ckpt, const Tensor& inputs);
EvalReport evaluate(const Checkpoint& ckpt, const Dataset& data);
/// `sample,rel_error` rows.
std::string errors_csv(const std::vector<double>& errors);

/// Analytic rows for the configured GIT-Net and PCA-Net and the FNO and
/// POD-DeepONet scaling models; with `instrument`, adds a column of counts
/// measured on live forward passes of the two implemented models.
std::string cmd_flops(const RunConfig& cfg, bool instrument);

}  // namespace gitnet
