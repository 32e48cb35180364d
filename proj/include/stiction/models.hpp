#pragma once

// The three classifiers:
//   cnn      conv(128) conv(64) conv(32), kernel 3, same padding, ReLU
//            [optional max-pool(2) after each conv] -> flatten
//            -> dense 64 ReLU -> dense 32 ReLU -> dense 1 sigmoid
//   lstm     LSTM 64 (full sequence) -> LSTM 32 (last state)
//            -> dense 32 ReLU -> dense 1 sigmoid
//   cnn_svm  the cnn trained end to end, frozen, with an RBF SVM fitted
//            on its 32-unit dense activations
// Inputs are (D*L) x 2 with channels (PV, OP).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stiction/nn/network.hpp"
#include "stiction/nn/training.hpp"
#include "stiction/svm.hpp"
#include "stiction/windowing.hpp"

namespace stiction {

enum class ModelKind : std::uint32_t { cnn = 0, lstm = 1, cnn_svm = 2 };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);  // throws Error(UnknownKind)

struct ArchitectureSpec {
  ModelKind kind = ModelKind::cnn;
  std::vector<std::size_t> conv_filters{128, 64, 32};
  std::size_t kernel_width = 3;
  std::vector<std::size_t> dense_units{64, 32};
  std::vector<std::size_t> lstm_units{64, 32};
  std::size_t lstm_dense = 32;
  bool pooling = false;

  static ArchitectureSpec defaults(ModelKind kind);

  // Every width divided by `divisor` (at least 1 unit each).
  ArchitectureSpec reduced(std::size_t divisor) const;

  void validate() const;
};

// Builds and initialises the network for a (rows x 2) input. For cnn_svm
// this is the convolutional feature extractor with its sigmoid head.
nn::Network build(const ArchitectureSpec& spec, std::size_t input_rows, std::uint64_t seed);

struct Prediction {
  double probability = 0.0;
  int label = 0;
};

// Sigmoid head output; label 1 iff probability >= 0.5.
Prediction classify(const nn::Network& net, std::span<const double> input);

// Activations of the last hidden dense layer (the input of the head).
// Throws Error(WrongKind) unless `kind` is cnn or cnn_svm.
std::vector<double> extract_features(const nn::Network& net, ModelKind kind, std::span<const double> input);

struct ModelTrainConfig {
  nn::TrainConfig train;
  SvmParams svm;
  std::size_t svm_max_rows = 20000;
};

class Model {
 public:
  ArchitectureSpec spec;
  std::size_t input_rows = 0;
  std::uint64_t seed = 0;
  nn::Network network{nn::Shape{1, 1}};
  std::optional<SvmModel> svm;
  nn::TrainHistory history;

  // For cnn_svm the probability is the logistic of the SVM decision value
  // (uncalibrated) and the label is 1 iff the decision is >= 0.
  Prediction predict(std::span<const double> input) const;
};

// Builds with `seed`, fits on the dataset's train/validation blocks and,
// for cnn_svm, trains the SVM on (at most svm_max_rows) training features.
Model train_model(const ArchitectureSpec& spec, const WindowDataset& data, const ModelTrainConfig& cfg,
                  std::uint64_t seed);

}  // namespace stiction
