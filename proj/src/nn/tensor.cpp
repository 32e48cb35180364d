#include "stiction/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "stiction/error.hpp"

namespace stiction::nn {

Tensor2 Tensor2::from(std::size_t r, std::size_t c, std::span<const double> values) {
  if (values.size() != r * c) fail(ErrorKind::ShapeMismatch, "tensor data does not match its shape");
  Tensor2 t;
  t.rows = r;
  t.cols = c;
  t.data.assign(values.begin(), values.end());
  return t;
}

void Tensor2::reset(std::size_t r, std::size_t c) {
  rows = r;
  cols = c;
  data.assign(r * c, 0.0);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-std::clamp(x, -500.0, 500.0))); }

double relu(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace stiction::nn
