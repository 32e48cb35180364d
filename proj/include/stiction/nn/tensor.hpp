#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stiction::nn {

// Row-major matrix: rows are time steps, columns are channels/features.
struct Tensor2 {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor2() = default;
  Tensor2(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  static Tensor2 from(std::size_t r, std::size_t c, std::span<const double> values);

  // Resizes and zero-fills.
  void reset(std::size_t r, std::size_t c);

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return std::span(data).subspan(r * cols, cols); }
  std::span<const double> row(std::size_t r) const { return std::span(data).subspan(r * cols, cols); }
  std::size_t size() const { return data.size(); }
};

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

double sigmoid(double x);  // input clamped to [-500, 500]
double relu(double x);

}  // namespace stiction::nn
