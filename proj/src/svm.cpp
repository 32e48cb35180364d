#include "stiction/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stiction/binio.hpp"
#include "stiction/error.hpp"

namespace stiction {
namespace {

constexpr double kTau = 1e-12;

// Least-recently-used cache of kernel rows.
class KernelCache {
 public:
  KernelCache(std::span<const double> x, std::size_t dim, double gamma, std::size_t capacity, ExecutionPolicy policy)
      : x_(x), dim_(dim), n_(x.size() / dim), gamma_(gamma), policy_(policy),
        capacity_(std::max<std::size_t>(2, capacity)), slot_of_(n_, kNone) {}

  std::span<const double> row(std::size_t i) {
    if (slot_of_[i] != kNone) {
      stamp_[slot_of_[i]] = ++clock_;
      return rows_[slot_of_[i]];
    }
    std::size_t slot;
    if (rows_.size() < capacity_) {
      slot = rows_.size();
      rows_.emplace_back(n_);
      owner_.push_back(i);
      stamp_.push_back(0);
    } else {
      slot = static_cast<std::size_t>(std::min_element(stamp_.begin(), stamp_.end()) - stamp_.begin());
      slot_of_[owner_[slot]] = kNone;
      owner_[slot] = i;
    }
    rbf_kernel_row(x_, dim_, i, gamma_, rows_[slot], policy_);
    slot_of_[i] = slot;
    stamp_[slot] = ++clock_;
    return rows_[slot];
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::span<const double> x_;
  std::size_t dim_, n_;
  double gamma_;
  ExecutionPolicy policy_;
  std::size_t capacity_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::size_t> owner_;
  std::vector<std::uint64_t> stamp_;
  std::vector<std::size_t> slot_of_;
  std::uint64_t clock_ = 0;
};

}  // namespace

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

void rbf_kernel_row(std::span<const double> x, std::size_t dim, std::size_t i, double gamma, std::span<double> out,
                    ExecutionPolicy policy) {
  const std::size_t n = x.size() / dim;
  const auto xi = x.subspan(i * dim, dim);
  const bool par = policy == ExecutionPolicy::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(n); ++t)
    out[static_cast<std::size_t>(t)] = rbf_kernel(xi, x.subspan(static_cast<std::size_t>(t) * dim, dim), gamma);
}

double default_gamma(std::span<const double> x, std::size_t dim) {
  const std::size_t n = x.size() / dim;
  double mean_var = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += x[i * dim + k];
    m /= static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += (x[i * dim + k] - m) * (x[i * dim + k] - m);
    mean_var += v / static_cast<double>(n);
  }
  mean_var /= static_cast<double>(dim);
  return mean_var > 0.0 ? 1.0 / (static_cast<double>(dim) * mean_var) : 1.0 / static_cast<double>(dim);
}

double SvmModel::decision(std::span<const double> x) const {
  if (x.size() != dim) fail(ErrorKind::ShapeMismatch, "svm: feature width");
  double f = b;
  for (std::size_t s = 0; s < coef.size(); ++s)
    f += coef[s] * rbf_kernel(std::span(support).subspan(s * dim, dim), x, gamma);
  return f;
}

SvmPrediction svm_predict(const SvmModel& model, std::span<const double> x) {
  SvmPrediction p;
  p.decision = model.decision(x);
  p.label = p.decision >= 0.0 ? 1 : -1;
  return p;
}

SvmTrainResult svm_train(std::span<const double> x, std::size_t dim, std::span<const int> y, const SvmParams& params) {
  if (dim == 0 || x.size() % dim != 0) fail(ErrorKind::ShapeMismatch, "svm: feature matrix shape");
  const std::size_t n = x.size() / dim;
  if (y.size() != n) fail(ErrorKind::LengthMismatch, "svm: labels and rows differ in length");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else fail(ErrorKind::InvalidArgument, "svm: labels must be +1 or -1");
  }
  if (!pos || !neg) fail(ErrorKind::SingleClass, "svm: training data contains a single class");
  if (!(params.c > 0.0) || !(params.tol > 0.0)) fail(ErrorKind::InvalidArgument, "svm: C and tol must be positive");

  const double C = params.c;
  const double gamma = params.gamma.value_or(default_gamma(x, dim));
  const std::size_t max_iter = params.max_iterations ? params.max_iterations : std::max<std::size_t>(10'000'000, 100 * n);
  const std::size_t cache_rows = std::max<std::size_t>(2, params.cache_megabytes * 1024 * 1024 / (8 * n));
  KernelCache cache(x, dim, gamma, cache_rows, params.policy);

  std::vector<double> alpha(n, 0.0), G(n, -1.0), QD(n, 1.0);  // k(x, x) = 1 for RBF
  auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0); };
  auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C); };

  SvmTrainResult result;
  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t)
      if (in_up(t) && -y[t] * G[t] >= gmax) {
        gmax = -y[t] * G[t];
        i = t;
      }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double obj_min = std::numeric_limits<double>::infinity();
    const std::span<const double> Ki = i < n ? cache.row(i) : std::span<const double>{};
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double yg = y[t] * G[t];
      gmax2 = std::max(gmax2, yg);
      const double grad_diff = gmax + yg;
      if (i < n && grad_diff > 0.0) {
        double a = QD[i] + QD[t] - 2.0 * Ki[t];
        if (a <= 0.0) a = kTau;
        const double obj = -(grad_diff * grad_diff) / a;
        if (obj <= obj_min) {
          obj_min = obj;
          j = t;
        }
      }
    }
    if (gmax + gmax2 < params.tol || i == n || j == n) {
      result.converged = true;
      break;
    }

    const auto Kj = cache.row(j);
    const auto Ki2 = cache.row(i);  // re-fetch: row(j) may have evicted i
    const double old_ai = alpha[i], old_aj = alpha[j];
    const double kij = Ki2[j];
    if (y[i] != y[j]) {
      double quad = QD[i] + QD[j] - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = QD[i] + QD[j] - 2.0 * kij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    // G_t += Q_ti dai + Q_tj daj with Q_ts = y_t y_s k(x_t, x_s).
    for (std::size_t t = 0; t < n; ++t) G[t] += y[t] * (y[i] * Ki2[t] * dai + y[j] * Kj[t] * daj);
  }
  result.iterations = iter;

  // Bias from free vectors, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * G[t];
    if (alpha[t] >= C) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  auto& m = result.model;
  m.dim = dim;
  m.gamma = gamma;
  m.c = C;
  m.b = -rho;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0) continue;
    m.support.insert(m.support.end(), x.begin() + static_cast<std::ptrdiff_t>(t * dim),
                     x.begin() + static_cast<std::ptrdiff_t>((t + 1) * dim));
    m.coef.push_back(alpha[t] * y[t]);
  }
  result.alpha = std::move(alpha);
  return result;
}

KktAudit audit_kkt(std::span<const double> x, std::size_t dim, std::span<const int> y, const SvmTrainResult& trained,
                   double tol) {
  KktAudit audit;
  const std::size_t n = y.size();
  const double C = trained.model.c;
  double eq = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double a = trained.alpha[t];
    if (a < 0.0 || a > C) audit.alpha_in_box = false;
    eq += a * y[t];
    const double margin = y[t] * trained.model.decision(x.subspan(t * dim, dim));
    double v;
    if (a <= 0.0) v = std::max(0.0, 1.0 - margin);
    else if (a >= C) v = std::max(0.0, margin - 1.0);
    else v = std::abs(margin - 1.0);
    audit.max_violation = std::max(audit.max_violation, v);
    if (v > tol) ++audit.violations;
  }
  audit.equality_residual = std::abs(eq);
  return audit;
}

void write_svm(std::ostream& out, const SvmModel& model) {
  using namespace binio;
  write_u64(out, model.support_count());
  write_u64(out, model.dim);
  write_f64(out, model.gamma);
  write_f64(out, model.c);
  write_f64(out, model.b);
  write_f64s(out, model.support);
  write_f64s(out, model.coef);
}

SvmModel read_svm(std::istream& in) {
  using namespace binio;
  SvmModel m;
  const auto n = read_u64(in);
  m.dim = read_u64(in);
  if (n > (1ULL << 28) || m.dim == 0 || m.dim > (1ULL << 20)) fail(ErrorKind::FormatError, "svm block header out of range");
  m.gamma = read_f64(in);
  m.c = read_f64(in);
  m.b = read_f64(in);
  m.support = read_f64s(in, n * m.dim);
  m.coef = read_f64s(in, n);
  return m;
}

}  // namespace stiction
