#pragma once

#include <cstddef>

#include "stiction/nn/network.hpp"

namespace stiction::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t parameters = 0;
};

// Compares the analytic batch gradient with central differences for every
// parameter. Relative error is |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport finite_diff_grad_check(Network& net, const Batch& batch, double step = 1e-5,
                                       double class_weight = 1.0);

}  // namespace stiction::nn
