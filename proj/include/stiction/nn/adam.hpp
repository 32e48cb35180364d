#pragma once

#include <span>

namespace stiction::nn {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam step t (t >= 1) applied elementwise in place.
// Throws Error(ShapeMismatch) if the spans differ in length.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
                 long t, const AdamConfig& cfg = {});

}  // namespace stiction::nn
