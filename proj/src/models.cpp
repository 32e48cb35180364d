#include "stiction/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stiction/error.hpp"
#include "stiction/rng.hpp"

namespace stiction {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::cnn: return "cnn";
    case ModelKind::lstm: return "lstm";
    case ModelKind::cnn_svm: return "cnn_svm";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "cnn") return ModelKind::cnn;
  if (s == "lstm") return ModelKind::lstm;
  if (s == "cnn_svm") return ModelKind::cnn_svm;
  fail(ErrorKind::UnknownKind, "unknown architecture '" + std::string(s) + "'");
}

ArchitectureSpec ArchitectureSpec::defaults(ModelKind kind) {
  ArchitectureSpec s;
  s.kind = kind;
  return s;
}

ArchitectureSpec ArchitectureSpec::reduced(std::size_t divisor) const {
  if (divisor == 0) fail(ErrorKind::InvalidArgument, "reduction divisor must be positive");
  ArchitectureSpec s = *this;
  auto shrink = [divisor](std::size_t v) { return std::max<std::size_t>(1, v / divisor); };
  for (auto& v : s.conv_filters) v = shrink(v);
  for (auto& v : s.dense_units) v = shrink(v);
  for (auto& v : s.lstm_units) v = shrink(v);
  s.lstm_dense = shrink(s.lstm_dense);
  return s;
}

void ArchitectureSpec::validate() const {
  if (kind != ModelKind::cnn && kind != ModelKind::lstm && kind != ModelKind::cnn_svm)
    fail(ErrorKind::UnknownKind, "unknown architecture kind");
  auto positive = [](const std::vector<std::size_t>& v) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [](std::size_t u) { return u > 0; });
  };
  if (kind == ModelKind::lstm) {
    if (!positive(lstm_units) || lstm_dense == 0) fail(ErrorKind::InvalidArgument, "lstm widths must be positive");
  } else {
    if (!positive(conv_filters) || !positive(dense_units) || kernel_width % 2 == 0)
      fail(ErrorKind::InvalidArgument, "cnn widths must be positive and the kernel width odd");
  }
}

nn::Network build(const ArchitectureSpec& spec, std::size_t input_rows, std::uint64_t seed) {
  spec.validate();
  if (input_rows == 0) fail(ErrorKind::ShapeMismatch, "input must have at least one row");
  using namespace nn;
  Network net(Shape{input_rows, kChannels});
  if (spec.kind == ModelKind::lstm) {
    for (std::size_t l = 0; l < spec.lstm_units.size(); ++l) {
      const bool last = l + 1 == spec.lstm_units.size();
      net.add(std::make_unique<Lstm>(net.output_shape(), spec.lstm_units[l], !last));
    }
    net.add(std::make_unique<Dense>(net.output_shape(), spec.lstm_dense, Activation::relu));
  } else {
    for (std::size_t f : spec.conv_filters) {
      net.add(std::make_unique<Conv1D>(net.output_shape(), f, spec.kernel_width, Activation::relu));
      if (spec.pooling && net.output_shape().rows >= 2) net.add(std::make_unique<MaxPool1D>(net.output_shape()));
    }
    net.add(std::make_unique<Flatten>(net.output_shape()));
    for (std::size_t u : spec.dense_units) net.add(std::make_unique<Dense>(net.output_shape(), u, Activation::relu));
  }
  net.add(std::make_unique<Dense>(net.output_shape(), 1, Activation::sigmoid));
  net.initialize(seed);
  return net;
}

Prediction classify(const nn::Network& net, std::span<const double> input) {
  Prediction p;
  p.probability = net.predict(input);
  p.label = p.probability >= 0.5 ? 1 : 0;
  return p;
}

std::vector<double> extract_features(const nn::Network& net, ModelKind kind, std::span<const double> input) {
  if (kind != ModelKind::cnn && kind != ModelKind::cnn_svm)
    fail(ErrorKind::WrongKind, "feature extraction needs the convolutional network");
  nn::Workspace ws;
  return net.forward(input, ws, net.layer_count() - 1).data;
}

Prediction Model::predict(std::span<const double> input) const {
  if (spec.kind != ModelKind::cnn_svm) return classify(network, input);
  if (!svm) fail(ErrorKind::InvalidArgument, "cnn_svm model has no SVM head");
  const auto f = svm_predict(*svm, extract_features(network, spec.kind, input));
  Prediction p;
  p.probability = 1.0 / (1.0 + std::exp(-std::clamp(f.decision, -500.0, 500.0)));
  p.label = f.label > 0 ? 1 : 0;
  return p;
}

Model train_model(const ArchitectureSpec& spec, const WindowDataset& data, const ModelTrainConfig& cfg,
                  std::uint64_t seed) {
  Model m;
  m.spec = spec;
  m.input_rows = data.rows;
  m.seed = seed;
  m.network = build(spec, data.rows, seed);
  m.history = nn::fit(m.network, data, cfg.train);
  if (spec.kind != ModelKind::cnn_svm) return m;

  std::vector<std::size_t> rows(data.train_end);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (rows.size() > cfg.svm_max_rows) {
    Rng rng(seed ^ 0x5356'4D53'5542'5345ULL);
    for (std::size_t i = 0; i < cfg.svm_max_rows; ++i) std::swap(rows[i], rows[i + rng.below(rows.size() - i)]);
    rows.resize(cfg.svm_max_rows);
    std::sort(rows.begin(), rows.end());
  }
  std::vector<double> features;
  std::vector<int> labels;
  std::size_t dim = 0;
  for (std::size_t r : rows) {
    const auto f = extract_features(m.network, spec.kind, data.input(r));
    dim = f.size();
    features.insert(features.end(), f.begin(), f.end());
    labels.push_back(data.labels[r] ? 1 : -1);
  }
  m.svm = svm_train(features, dim, labels, cfg.svm).model;
  return m;
}

}  // namespace stiction
