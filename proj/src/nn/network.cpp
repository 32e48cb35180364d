#include "stiction/nn/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "stiction/error.hpp"
#include "stiction/nn/loss.hpp"
#include "stiction/rng.hpp"

namespace stiction::nn {

Network::Network(const Network& other) : input_(other.input_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Network::add(std::unique_ptr<Layer> layer) {
  if (!(layer->input_shape() == output_shape()))
    fail(ErrorKind::ShapeMismatch, "layer input shape does not match the previous output");
  layers_.push_back(std::move(layer));
}

Shape Network::output_shape() const { return layers_.empty() ? input_ : layers_.back()->output_shape(); }

std::size_t Network::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l->params().size();
  return n;
}

std::vector<double> Network::flat_params() const {
  std::vector<double> out;
  out.reserve(param_count());
  for (const auto& l : layers_) {
    const auto p = static_cast<const Layer&>(*l).params();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

void Network::set_flat_params(std::span<const double> values) {
  if (values.size() != param_count()) fail(ErrorKind::ShapeMismatch, "parameter count mismatch");
  std::size_t off = 0;
  for (auto& l : layers_) {
    auto p = l->params();
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(off), p.size(), p.begin());
    off += p.size();
  }
}

void Network::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& l : layers_) {
    l->initialize(rng);
    std::fill(l->adam_m().begin(), l->adam_m().end(), 0.0);
    std::fill(l->adam_v().begin(), l->adam_v().end(), 0.0);
  }
}

const Tensor2& Network::forward(std::span<const double> input, Workspace& ws, std::size_t upto) const {
  if (input.size() != input_.size())
    fail(ErrorKind::ShapeMismatch, "input has " + std::to_string(input.size()) + " values, network expects " +
                                       std::to_string(input_.size()));
  upto = std::min(upto, layers_.size());
  ws.acts.resize(layers_.size() + 1);
  ws.caches.resize(layers_.size());
  auto& x = ws.acts[0];
  x.rows = input_.rows;
  x.cols = input_.cols;
  x.data.assign(input.begin(), input.end());
  for (std::size_t l = 0; l < upto; ++l) layers_[l]->forward(ws.acts[l], ws.acts[l + 1], ws.caches[l]);
  return ws.acts[upto];
}

double Network::predict(std::span<const double> input, Workspace& ws) const {
  const auto& out = forward(input, ws, layers_.size());
  if (out.size() != 1) fail(ErrorKind::ShapeMismatch, "network head must output one value");
  return out.data[0];
}

double Network::predict(std::span<const double> input) const {
  Workspace ws;
  return predict(input, ws);
}

double Network::sample_gradient(std::span<const double> input, int label, double class_weight, Workspace& ws,
                                std::span<double> grad) const {
  if (grad.size() != param_count()) fail(ErrorKind::ShapeMismatch, "gradient buffer size");
  const double p = predict(input, ws);
  double dp = 0.0;
  const double loss = bce_term(p, label, class_weight, &dp);
  std::fill(grad.begin(), grad.end(), 0.0);

  std::vector<std::size_t> offsets(layers_.size() + 1, 0);
  for (std::size_t l = 0; l < layers_.size(); ++l) offsets[l + 1] = offsets[l] + layers_[l]->params().size();

  Tensor2* dout = &ws.grad_a;
  Tensor2* din = &ws.grad_b;
  dout->reset(1, 1);
  dout->data[0] = dp;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto slice = grad.subspan(offsets[l], offsets[l + 1] - offsets[l]);
    layers_[l]->backward(ws.acts[l], ws.acts[l + 1], ws.caches[l], *dout, *din, slice);
    std::swap(dout, din);
  }
  return loss;
}

double batch_gradient(const Network& net, const Batch& batch, double class_weight, std::span<double> grad,
                      ExecutionPolicy policy) {
  const std::size_t B = batch.size();
  const std::size_t P = net.param_count();
  if (B == 0) fail(ErrorKind::EmptyInput, "empty batch");
  if (batch.inputs.size() != B) fail(ErrorKind::LengthMismatch, "batch inputs and labels differ in length");
  if (grad.size() != P) fail(ErrorKind::ShapeMismatch, "gradient buffer size");

  std::vector<double> losses(B);
  std::fill(grad.begin(), grad.end(), 0.0);
  if (policy == ExecutionPolicy::serial) {
    Workspace ws;
    std::vector<double> g(P);
    for (std::size_t i = 0; i < B; ++i) {
      losses[i] = net.sample_gradient(batch.inputs[i], batch.labels[i], class_weight, ws, g);
      for (std::size_t j = 0; j < P; ++j) grad[j] += g[j];
    }
  } else {
    std::vector<double> per(B * P);
#pragma omp parallel
    {
      Workspace ws;
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(B); ++i) {
        const auto k = static_cast<std::size_t>(i);
        losses[k] = net.sample_gradient(batch.inputs[k], batch.labels[k], class_weight, ws,
                                        std::span(per).subspan(k * P, P));
      }
      // Reduce each parameter over samples in sample order.
#pragma omp for schedule(static)
      for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(P); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < B; ++i) s += per[i * P + static_cast<std::size_t>(j)];
        grad[static_cast<std::size_t>(j)] = s;
      }
    }
  }
  double total = 0.0;
  for (double l : losses) total += l;
  const auto b = static_cast<double>(B);
  for (auto& g : grad) g /= b;
  return total / b;
}

double batch_loss(const Network& net, const Batch& batch, double class_weight, ExecutionPolicy policy) {
  const std::size_t B = batch.size();
  if (B == 0) fail(ErrorKind::EmptyInput, "empty batch");
  std::vector<double> losses(B);
  const bool par = policy == ExecutionPolicy::parallel;
#pragma omp parallel if (par)
  {
    Workspace ws;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(B); ++i) {
      const auto k = static_cast<std::size_t>(i);
      losses[k] = bce_term(net.predict(batch.inputs[k], ws), batch.labels[k], class_weight);
    }
  }
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(B);
}

std::uint64_t parameter_hash(const Network& net) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : net.flat_params()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace stiction::nn
