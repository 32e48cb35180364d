#pragma once

#include <span>
#include <vector>

namespace stiction::nn {

inline constexpr double kProbabilityFloor = 1e-7;

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // dLoss/dp_i
};

// Mean of -[w y ln p + (1 - y) ln(1 - p)] with p clamped to
// [1e-7, 1 - 1e-7]. The gradient is zero where the clamp is active.
// Throws Error(LengthMismatch).
LossGrad bce_loss(std::span<const double> p, std::span<const int> y, double class_weight = 1.0);

// Per-sample term and its derivative, unscaled by the batch size.
double bce_term(double p, int y, double class_weight, double* dloss_dp = nullptr);

}  // namespace stiction::nn
