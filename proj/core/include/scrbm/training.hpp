#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "scrbm/data.hpp"
#include "scrbm/metrics.hpp"
#include "scrbm/model.hpp"
#include "scrbm/optimizer.hpp"
#include "scrbm/rnn.hpp"

namespace scrbm {

struct SequenceGradient {
  double nll = 0.0;
  Gradients grads;
};

/// Gradient of the teacher-forced sequence NLL (points uphill; optimizers
/// subtract it). The backward message through the mean-field states starts
/// at zero after the last step. Throws NumericFault with the step index if
/// anything goes non-finite.
SequenceGradient sequence_gradients(const ModelParams& params, const SequenceExample& example);

/// Mean NLL and mean gradient over a batch of sequences, reduced in order.
SequenceGradient batch_gradients(const ModelParams& params,
                                 std::span<const SequenceExample> batch);

struct TrainConfig {
  std::size_t n_hidden = 100;
  ModelOptions model;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 1;
  std::size_t max_epochs = 100;
  std::size_t check_every_epochs = 10;
  std::size_t patience_checks = 5;
  std::uint64_t seed = 0;
  double l2 = 0.0;  // applied to weight matrices, not biases
  std::optional<double> grad_clip_norm;
  // Holds W_hh at zero so no state crosses time steps (memoryless control).
  bool freeze_recurrence = false;

  void validate() const;
  AdamConfig adam() const {
    return {learning_rate, adam_beta1, adam_beta2, adam_eps};
  }
};

/// W, W_hh, U uniform in +-1/sqrt(fan_in); b, c zero; h_init 0.5.
ModelParams init_params(const ModelDims& dims, ModelOptions options, std::uint64_t seed);

enum class StopDecision { Continue, Stop };

/// Stop iff each of the last `patience` values is strictly worse (greater)
/// than the best value seen before it.
StopDecision early_stopping_check(std::span<const double> series, std::size_t patience);

struct CheckRecord {
  std::size_t epoch = 0;
  double train_nll = 0.0;    // mean teacher-forced NLL per token over the epoch
  double valid_nll = 0.0;    // EvalReport::avg_nll_nats on the validation set
  double valid_error = 0.0;  // sequence error on the validation set
  double valid_cross_entropy = 0.0;  // NaN for labelling tasks
  double selection = 0.0;    // the value early stopping looks at
};

enum class StopReason { EarlyStop, MaxEpochs };

struct TrainHistory {
  std::vector<CheckRecord> records;
  std::size_t best_check_index = 0;  // 0-based into records
  StopReason stop_reason = StopReason::MaxEpochs;

  std::vector<double> selection_series() const;
};

/// Handed to the observer after every check, in order.
struct CheckReport {
  std::size_t epoch = 0;
  std::optional<EvalReport> train;  // full pass over the training set
  EvalReport valid;
  bool improved = false;
};

using CheckObserver = std::function<void(const CheckReport&)>;

struct TrainResult {
  ModelParams params;  // from the best check, not the last epoch
  TrainHistory history;
};

struct RnnTrainResult {
  RnnParams params;
  TrainHistory history;
};

/// Seeded shuffling, minibatch gradient averaging, optimizer steps and the
/// periodic validation check with patience-based stopping. The selection
/// metric is sequence error for labelling data and cross-entropy for
/// next-event data. An empty `valid` set falls back to the training set.
TrainResult train(const Dataset& dataset, const Dataset& valid, const TrainConfig& config,
                  const CheckObserver& observer = {});

/// Same loop for the tanh RNN baseline.
RnnTrainResult train_rnn(const Dataset& dataset, const Dataset& valid, const TrainConfig& config,
                         const CheckObserver& observer = {});

}  // namespace scrbm
