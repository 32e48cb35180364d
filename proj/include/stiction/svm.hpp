#pragma once

/// \file svm.hpp
/// \brief Soft-margin RBF support vector machine trained by SMO.
///
/// The solver follows the working-set selection of Fan, Chen and Lin
/// (second-order information, as in LIBSVM): the first index maximises
/// -y_t G_t over the "up" set, the second minimises the predicted decrease
/// of the dual objective among "low" candidates. Training stops when the
/// maximal KKT violation m(alpha) - M(alpha) falls below `tol`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "stiction/execution.hpp"

namespace stiction {

struct SvmParams {
  double c = 1.0;
  std::optional<double> gamma;  ///< unset: 1 / (d * mean feature variance)
  double tol = 1e-3;
  std::size_t max_iterations = 0;  ///< 0: max(10^7, 100 n)
  std::size_t cache_megabytes = 200;
  ExecutionPolicy policy = ExecutionPolicy::parallel;
};

/// Decision function f(x) = sum_i coef_i k(sv_i, x) + b with coef_i = alpha_i y_i.
struct SvmModel {
  std::size_t dim = 0;
  std::vector<double> support;  ///< n_sv x dim, row-major
  std::vector<double> coef;
  double b = 0.0;
  double gamma = 1.0;
  double c = 1.0;

  std::size_t support_count() const { return coef.size(); }
  double decision(std::span<const double> x) const;
};

struct SvmPrediction {
  double decision = 0.0;
  int label = 1;  ///< +1 or -1; a zero decision maps to +1
};

SvmPrediction svm_predict(const SvmModel& model, std::span<const double> x);

struct SvmTrainResult {
  SvmModel model;
  std::vector<double> alpha;  ///< one per training row
  std::size_t iterations = 0;
  bool converged = false;
};

/// \param x n x dim row-major features
/// \param y labels in {+1, -1}
/// \throws Error(SingleClass) if only one label is present.
SvmTrainResult svm_train(std::span<const double> x, std::size_t dim, std::span<const int> y,
                         const SvmParams& params = {});

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// k(x_i, x_t) for every row t. The OpenMP and serial paths are identical.
void rbf_kernel_row(std::span<const double> x, std::size_t dim, std::size_t i, double gamma, std::span<double> out,
                    ExecutionPolicy policy = ExecutionPolicy::parallel);

double default_gamma(std::span<const double> x, std::size_t dim);

struct KktAudit {
  bool alpha_in_box = true;
  double equality_residual = 0.0;  ///< |sum alpha_i y_i|
  double max_violation = 0.0;
  std::size_t violations = 0;      ///< points violating by more than tol
};

KktAudit audit_kkt(std::span<const double> x, std::size_t dim, std::span<const int> y,
                   const SvmTrainResult& trained, double tol);

void write_svm(std::ostream& out, const SvmModel& model);
SvmModel read_svm(std::istream& in);

}  // namespace stiction
