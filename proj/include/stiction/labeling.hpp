#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stiction/execution.hpp"
#include "stiction/seriesio.hpp"

namespace stiction {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Least-squares line through (t, y[t]) for t = 0..len-1, computed from
// centered sums. Requires len >= 2.
LineFit ols_slope(std::span<const double> y);

struct SlopeRatioConfig {
  int window_minutes = 60;
  int n_consecutive = 24;
  // |m_pv| below this gives R = 0. Acts as a noise floor on noisy data.
  double pv_slope_epsilon = 1e-9;

  void validate() const;
};

struct WindowRegression {
  double m_pv = 0.0;
  double b_pv = 0.0;
  double m_op = 0.0;
  double b_op = 0.0;
  double ratio = 0.0;  // R = m_op / m_pv
};

// One regression per non-overlapping window; a trailing partial window is
// dropped. Throws Error(SeriesTooShort).
std::vector<WindowRegression> slope_ratio_windows(const UniformSeries& series,
                                                  const SlopeRatioConfig& cfg,
                                                  ExecutionPolicy policy = ExecutionPolicy::parallel);

// Trailing mean of R over windows i-n+1..i. Throws Error(InsufficientHistory)
// when i < n - 1.
double stiction_index_beta(std::span<const WindowRegression> regressions, int n, std::size_t i);

enum class LabelMethod { slope_ratio, hotelling_t2, ground_truth };

std::string_view to_string(LabelMethod m);
LabelMethod parse_label_method(std::string_view s);

struct LabeledWindow {
  std::size_t window_index = 0;
  std::int64_t start_minute = 0;  // offset from the series start
  int label = 0;                  // 1 = stiction
  double score = 0.0;             // beta, T^2, or flagged fraction
  LabelMethod method = LabelMethod::slope_ratio;
  bool warmup = false;
};

// Window i is labelled 1 iff beta_i > 0. The first n-1 windows average
// over the windows available so far and are flagged warm-up.
// Throws Error(SeriesTooShort) if fewer than n full windows exist.
std::vector<LabeledWindow> slope_ratio_labels(const UniformSeries& series, const SlopeRatioConfig& cfg);

// (mean_op, std_op, slope_op, mean_pv, std_pv, slope_pv); population std.
using T2Features = std::array<double, 6>;

T2Features t2_features(std::span<const double> op, std::span<const double> pv);

std::vector<T2Features> t2_window_features(const UniformSeries& series, int window_minutes,
                                           ExecutionPolicy policy = ExecutionPolicy::parallel);

struct T2Config {
  int window_minutes = 60;
  double percentile = 90.0;
  // Unset means 1e-6 * trace(S) / 6 with S the sample covariance.
  std::optional<double> ridge_lambda;

  void validate() const;
};

// Mean and Cholesky factor of (S + lambda I) fitted on a feature set.
class HotellingModel {
 public:
  // Throws Error(SeriesTooShort) for fewer than 7 rows and
  // Error(SingularCovariance) if the regularised covariance is not
  // positive definite.
  static HotellingModel fit(std::span<const T2Features> features, std::optional<double> ridge_lambda);

  double score(const T2Features& x) const;
  const T2Features& mean() const { return mean_; }
  double ridge() const { return ridge_; }

 private:
  T2Features mean_{};
  std::array<double, 36> chol_{};  // lower triangle, row-major
  double ridge_ = 0.0;
};

std::vector<double> hotelling_t2(std::span<const T2Features> features, const T2Config& cfg);

// Linear interpolation between order statistics at rank p/100 * (n - 1).
double percentile_linear(std::span<const double> values, double p);

// Label 1 iff score > percentile(scores, p).
std::vector<LabeledWindow> t2_threshold_labels(std::span<const double> scores, const T2Config& cfg);

// Features, scores and threshold labels in one pass.
std::vector<LabeledWindow> t2_labels(const UniformSeries& series, const T2Config& cfg);

// Window label from per-minute simulator flags: 1 iff more than half the
// minutes are flagged. Score is the flagged fraction.
std::vector<LabeledWindow> ground_truth_labels(std::span<const std::uint8_t> flags, int window_minutes);

// `window_index,start_timestamp,score,label,method,warmup`
void write_labels(std::ostream& out, std::span<const LabeledWindow> labels, Minute t0);
std::vector<LabeledWindow> read_labels(std::istream& in, Minute t0);

}  // namespace stiction
