#pragma once

// Layers with hand-written backward passes.
//
// Each layer owns one flat parameter block plus Adam moments of the same
// size. Block layouts:
//   Conv1D  W[f][k][c] (F x K x C), then b[f]
//   Dense   W[j][i]    (M x N),     then b[j]
//   LSTM    W[g][c]    (4H x C), U[g][h] (4H x H), then b[g]; gate rows
//           ordered input, forget, candidate, output
// MaxPool1D and Flatten have no parameters.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stiction/nn/tensor.hpp"

namespace stiction {
class Rng;
}

namespace stiction::nn {

enum class LayerKind : std::uint32_t { conv1d = 0, dense = 1, lstm = 2, maxpool = 3, flatten = 4 };
enum class Activation : std::uint32_t { none = 0, relu = 1, sigmoid = 2 };

// Cross-correlation with zero "same" padding, T x C -> T x F.
Tensor2 conv1d_apply(const Tensor2& input, std::span<const double> kernels, std::span<const double> bias,
                     std::size_t filters, std::size_t width, Activation act);

std::vector<double> dense_apply(std::span<const double> x, std::span<const double> weights,
                                std::span<const double> bias, Activation act);

struct LstmWeights {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::span<const double> w;  // 4H x C
  std::span<const double> u;  // 4H x H
  std::span<const double> b;  // 4H
};

struct LstmStep {
  std::vector<double> h;
  std::vector<double> c;
};

LstmStep lstm_step(std::span<const double> x, std::span<const double> h_prev, std::span<const double> c_prev,
                   const LstmWeights& p);

// Zero initial state. Returns T x H, or 1 x H when return_sequence is false.
Tensor2 lstm_sequence(const Tensor2& inputs, const LstmWeights& p, bool return_sequence);

class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual std::string describe() const = 0;
  Shape input_shape() const { return in_; }
  virtual Shape output_shape() const = 0;

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<double> adam_m() { return m_; }
  std::span<double> adam_v() { return v_; }

  // Draws initial parameters from `rng` (weights first, then biases).
  virtual void initialize(Rng& rng) = 0;

  // `cache` holds whatever backward needs beyond input and output.
  virtual void forward(const Tensor2& in, Tensor2& out, std::vector<double>& cache) const = 0;

  // Writes din and accumulates (+=) into dparams.
  virtual void backward(const Tensor2& in, const Tensor2& out, const std::vector<double>& cache,
                        const Tensor2& dout, Tensor2& din, std::span<double> dparams) const = 0;

  virtual std::unique_ptr<Layer> clone() const = 0;

 protected:
  explicit Layer(Shape in, std::size_t n_params = 0) : in_(in), params_(n_params), m_(n_params), v_(n_params) {}

  Shape in_;
  std::vector<double> params_;
  std::vector<double> m_;
  std::vector<double> v_;
};

class Conv1D final : public Layer {
 public:
  Conv1D(Shape in, std::size_t filters, std::size_t width, Activation act);

  LayerKind kind() const override { return LayerKind::conv1d; }
  std::string describe() const override;
  Shape output_shape() const override { return {in_.rows, filters_}; }
  void initialize(Rng& rng) override;
  void forward(const Tensor2& in, Tensor2& out, std::vector<double>& cache) const override;
  void backward(const Tensor2& in, const Tensor2& out, const std::vector<double>& cache, const Tensor2& dout,
                Tensor2& din, std::span<double> dparams) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1D>(*this); }

  std::size_t filters() const { return filters_; }
  std::size_t width() const { return width_; }
  Activation activation() const { return act_; }

 private:
  std::size_t filters_;
  std::size_t width_;
  Activation act_;
};

class Dense final : public Layer {
 public:
  Dense(Shape in, std::size_t units, Activation act);

  LayerKind kind() const override { return LayerKind::dense; }
  std::string describe() const override;
  Shape output_shape() const override { return {1, units_}; }
  void initialize(Rng& rng) override;
  void forward(const Tensor2& in, Tensor2& out, std::vector<double>& cache) const override;
  void backward(const Tensor2& in, const Tensor2& out, const std::vector<double>& cache, const Tensor2& dout,
                Tensor2& din, std::span<double> dparams) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

  std::size_t units() const { return units_; }
  Activation activation() const { return act_; }

 private:
  std::size_t units_;
  Activation act_;
};

class Lstm final : public Layer {
 public:
  Lstm(Shape in, std::size_t hidden, bool return_sequence);

  LayerKind kind() const override { return LayerKind::lstm; }
  std::string describe() const override;
  Shape output_shape() const override { return {return_sequence_ ? in_.rows : 1, hidden_}; }
  void initialize(Rng& rng) override;
  void forward(const Tensor2& in, Tensor2& out, std::vector<double>& cache) const override;
  void backward(const Tensor2& in, const Tensor2& out, const std::vector<double>& cache, const Tensor2& dout,
                Tensor2& din, std::span<double> dparams) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Lstm>(*this); }

  std::size_t hidden() const { return hidden_; }
  bool return_sequence() const { return return_sequence_; }
  LstmWeights weights() const;

 private:
  std::size_t hidden_;
  bool return_sequence_;
};

class MaxPool1D final : public Layer {
 public:
  explicit MaxPool1D(Shape in);

  LayerKind kind() const override { return LayerKind::maxpool; }
  std::string describe() const override;
  Shape output_shape() const override { return {in_.rows / 2, in_.cols}; }
  void initialize(Rng&) override {}
  void forward(const Tensor2& in, Tensor2& out, std::vector<double>& cache) const override;
  void backward(const Tensor2& in, const Tensor2& out, const std::vector<double>& cache, const Tensor2& dout,
                Tensor2& din, std::span<double> dparams) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool1D>(*this); }
};

class Flatten final : public Layer {
 public:
  explicit Flatten(Shape in) : Layer(in) {}

  LayerKind kind() const override { return LayerKind::flatten; }
  std::string describe() const override;
  Shape output_shape() const override { return {1, in_.size()}; }
  void initialize(Rng&) override {}
  void forward(const Tensor2& in, Tensor2& out, std::vector<double>& cache) const override;
  void backward(const Tensor2& in, const Tensor2& out, const std::vector<double>& cache, const Tensor2& dout,
                Tensor2& din, std::span<double> dparams) const override;
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Flatten>(*this); }
};

}  // namespace stiction::nn
