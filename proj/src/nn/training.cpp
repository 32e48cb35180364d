#include "stiction/nn/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stiction/error.hpp"
#include "stiction/rng.hpp"

namespace stiction::nn {

void TrainConfig::validate() const {
  if (max_epochs < 1 || patience < 1 || batch_size < 1 || !(learning_rate > 0.0) || !(class_weight > 0.0))
    fail(ErrorKind::InvalidArgument, "training hyperparameters must be positive");
  if (patience >= max_epochs) fail(ErrorKind::InvalidArgument, "patience must be smaller than max_epochs");
}

bool EarlyStopping::observe(int epoch, double val_loss) {
  if (!seen_ || val_loss < best_) {
    seen_ = true;
    best_ = val_loss;
    best_epoch_ = epoch;
    wait_ = 0;
    return true;
  }
  ++wait_;
  return false;
}

Batch make_batch(const WindowDataset& data, std::size_t begin, std::size_t end) {
  Batch b;
  for (std::size_t i = begin; i < end; ++i) {
    b.inputs.push_back(data.input(i));
    b.labels.push_back(data.labels[i]);
  }
  return b;
}

Batch make_batch(const WindowDataset& data, std::span<const std::size_t> indices) {
  Batch b;
  for (std::size_t i : indices) {
    b.inputs.push_back(data.input(i));
    b.labels.push_back(data.labels[i]);
  }
  return b;
}

double balanced_class_weight(std::span<const int> labels) {
  const auto pos = static_cast<double>(std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; }));
  const auto neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0.0 || neg == 0.0) return 1.0;
  return std::max(pos, neg) / std::min(pos, neg);
}

double positive_class_weight(std::span<const int> labels, double class_weight) {
  const auto pos = std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; });
  const auto neg = static_cast<std::ptrdiff_t>(labels.size()) - pos;
  return pos <= neg ? class_weight : 1.0 / class_weight;
}

TrainHistory fit(Network& net, const WindowDataset& data, const TrainConfig& cfg, const FitHooks& hooks) {
  cfg.validate();
  if (data.train_end == 0) fail(ErrorKind::EmptySplit, "training split is empty");
  if (data.val_end <= data.train_end) fail(ErrorKind::EmptySplit, "validation split is empty");

  const std::size_t n = data.train_end;
  const Batch val = make_batch(data, data.train_end, data.val_end);
  const double pos_weight =
      positive_class_weight(std::span(data.labels).first(n), cfg.class_weight);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(cfg.seed);
  AdamConfig adam;
  adam.learning_rate = cfg.learning_rate;

  std::vector<std::size_t> offsets(net.layer_count() + 1, 0);
  for (std::size_t l = 0; l < net.layer_count(); ++l)
    offsets[l + 1] = offsets[l] + net.layer(l).params().size();
  std::vector<double> grad(net.param_count());

  TrainHistory history;
  EarlyStopping stopper(cfg.patience);
  std::vector<double> best = net.flat_params();
  long step = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = n; i-- > 1;) std::swap(order[i], order[rng.below(i + 1)]);

    double train_total = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const Batch batch = make_batch(data, std::span(order).subspan(start, stop - start));
      const double loss = batch_gradient(net, batch, pos_weight, grad, cfg.policy);
      if (!std::isfinite(loss)) fail(ErrorKind::NumericFailure, "training loss is not finite");
      train_total += loss * static_cast<double>(stop - start);
      ++step;
      for (std::size_t l = 0; l < net.layer_count(); ++l) {
        auto& layer = net.layer(l);
        if (layer.params().empty()) continue;
        adam_update(layer.params(), std::span<const double>(grad).subspan(offsets[l], offsets[l + 1] - offsets[l]),
                    layer.adam_m(), layer.adam_v(), step, adam);
      }
    }

    double val_loss = batch_loss(net, val, 1.0, cfg.policy);
    if (hooks.val_loss_override) val_loss = hooks.val_loss_override(epoch, val_loss);
    if (!std::isfinite(val_loss)) fail(ErrorKind::NumericFailure, "validation loss is not finite");
    history.epochs.push_back({epoch, train_total / static_cast<double>(n), val_loss});
    if (stopper.observe(epoch, val_loss)) best = net.flat_params();
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, net);
    if (stopper.should_stop()) {
      history.stopped_early = epoch < cfg.max_epochs;
      break;
    }
  }
  net.set_flat_params(best);
  history.best_epoch = stopper.best_epoch();
  return history;
}

}  // namespace stiction::nn
