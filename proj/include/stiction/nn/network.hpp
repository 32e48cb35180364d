#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "stiction/execution.hpp"
#include "stiction/nn/layers.hpp"

namespace stiction::nn {

// Per-thread scratch for one forward/backward pass.
struct Workspace {
  std::vector<Tensor2> acts;  // acts[0] = input, acts[l + 1] = output of layer l
  std::vector<std::vector<double>> caches;
  Tensor2 grad_a;
  Tensor2 grad_b;
};

// Inputs are borrowed views; they must outlive the batch.
struct Batch {
  std::vector<std::span<const double>> inputs;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

// A stack of layers ending in a single sigmoid unit.
class Network {
 public:
  explicit Network(Shape input) : input_(input) {}
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  // Appends a layer; its input shape must equal the current output shape.
  void add(std::unique_ptr<Layer> layer);

  Shape input_shape() const { return input_; }
  Shape output_shape() const;
  std::size_t layer_count() const { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }
  Layer& layer(std::size_t i) { return *layers_[i]; }

  std::size_t param_count() const;
  std::vector<double> flat_params() const;
  void set_flat_params(std::span<const double> values);

  void initialize(std::uint64_t seed);

  // Runs layers [0, upto) and returns the last activation.
  const Tensor2& forward(std::span<const double> input, Workspace& ws, std::size_t upto) const;

  // Output probability of the sigmoid head.
  double predict(std::span<const double> input, Workspace& ws) const;
  double predict(std::span<const double> input) const;

  // Weighted BCE of one sample; writes (not accumulates) its gradient
  // with respect to the flat parameters into `grad`.
  double sample_gradient(std::span<const double> input, int label, double class_weight, Workspace& ws,
                         std::span<double> grad) const;

 private:
  Shape input_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

// Mean weighted BCE over the batch and its gradient (written to `grad`).
// Per-sample gradients are summed in sample order then scaled by 1/B, so
// the serial and OpenMP paths return bit-identical results.
double batch_gradient(const Network& net, const Batch& batch, double class_weight, std::span<double> grad,
                      ExecutionPolicy policy);

// Mean weighted BCE without gradients.
double batch_loss(const Network& net, const Batch& batch, double class_weight,
                  ExecutionPolicy policy = ExecutionPolicy::serial);

// FNV-1a over the raw bytes of the flat parameters.
std::uint64_t parameter_hash(const Network& net);

}  // namespace stiction::nn
