#include "stiction/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "stiction/error.hpp"

namespace stiction::nn {

double bce_term(double p, int y, double class_weight, double* dloss_dp) {
  const double lo = kProbabilityFloor, hi = 1.0 - kProbabilityFloor;
  const double pc = std::clamp(p, lo, hi);
  const bool clamped = p < lo || p > hi;
  double loss;
  double d;
  if (y != 0) {
    loss = -class_weight * std::log(pc);
    d = -class_weight / pc;
  } else {
    loss = -std::log(1.0 - pc);
    d = 1.0 / (1.0 - pc);
  }
  if (dloss_dp) *dloss_dp = clamped ? 0.0 : d;
  return loss;
}

LossGrad bce_loss(std::span<const double> p, std::span<const int> y, double class_weight) {
  if (p.size() != y.size()) fail(ErrorKind::LengthMismatch, "bce_loss: predictions and labels differ in length");
  if (p.empty()) fail(ErrorKind::EmptyInput, "bce_loss: empty batch");
  const auto n = static_cast<double>(p.size());
  LossGrad r;
  r.grad.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    double d = 0.0;
    r.loss += bce_term(p[i], y[i], class_weight, &d);
    r.grad[i] = d / n;
  }
  r.loss /= n;
  return r;
}

}  // namespace stiction::nn
