#include "stiction/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace stiction::nn {

GradCheckReport finite_diff_grad_check(Network& net, const Batch& batch, double step, double class_weight) {
  const std::size_t P = net.param_count();
  std::vector<double> analytic(P);
  batch_gradient(net, batch, class_weight, analytic, ExecutionPolicy::serial);

  GradCheckReport report;
  report.parameters = P;
  std::vector<double> theta = net.flat_params();
  for (std::size_t i = 0; i < P; ++i) {
    const double saved = theta[i];
    theta[i] = saved + step;
    net.set_flat_params(theta);
    const double up = batch_loss(net, batch, class_weight);
    theta[i] = saved - step;
    net.set_flat_params(theta);
    const double down = batch_loss(net, batch, class_weight);
    theta[i] = saved;

    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
    if (err > report.max_rel_error || i == 0) {
      report.max_rel_error = err;
      report.worst_index = i;
      report.analytic_at_worst = a;
      report.numeric_at_worst = numeric;
    }
  }
  net.set_flat_params(theta);
  return report;
}

}  // namespace stiction::nn
