#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "stiction/execution.hpp"
#include "stiction/nn/adam.hpp"
#include "stiction/nn/network.hpp"
#include "stiction/windowing.hpp"

namespace stiction::nn {

struct TrainConfig {
  int max_epochs = 100;
  double learning_rate = 0.001;
  int patience = 3;
  int batch_size = 64;
  std::uint64_t seed = 42;
  // Multiplies the loss of the minority class of the training block.
  double class_weight = 1.0;
  ExecutionPolicy policy = ExecutionPolicy::serial;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  bool stopped_early = false;
};

// Tracks the best validation loss (strict improvement) and the number of
// epochs since it.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true if `val_loss` is a new best.
  bool observe(int epoch, double val_loss);
  bool should_stop() const { return wait_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }

 private:
  int patience_;
  int wait_ = 0;
  int best_epoch_ = 0;
  double best_ = 0.0;
  bool seen_ = false;
};

struct FitHooks {
  // Replaces the computed validation loss of an epoch (scripted schedules).
  std::function<double(int epoch, double computed)> val_loss_override;
  // Called after every epoch with the current (not yet restored) network.
  std::function<void(int epoch, const Network& net)> on_epoch_end;
};

// Mini-batch Adam on the training block with per-epoch Fisher-Yates
// shuffling from Rng(cfg.seed). Validation loss is the unweighted mean BCE
// over the validation block. Training stops after `patience` epochs without
// strict improvement; the best epoch's parameters are restored.
// Throws Error(EmptySplit) and Error(NumericFailure).
TrainHistory fit(Network& net, const WindowDataset& data, const TrainConfig& cfg, const FitHooks& hooks = {});

// Weight on the positive-class loss equivalent to `class_weight` on the
// minority class of `labels` (1/class_weight when positives are the
// majority; the common scale factor is absorbed by Adam).
double positive_class_weight(std::span<const int> labels, double class_weight);

// Majority count over minority count; 1 when either class is absent.
double balanced_class_weight(std::span<const int> labels);

// Views of samples [begin, end) of a dataset.
Batch make_batch(const WindowDataset& data, std::size_t begin, std::size_t end);
Batch make_batch(const WindowDataset& data, std::span<const std::size_t> indices);

}  // namespace stiction::nn
