#include "stiction/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "stiction/config.hpp"

namespace stiction {

LineFit ols_slope(std::span<const double> y) {
  const std::size_t n = y.size();
  if (n < 2) fail(ErrorKind::SeriesTooShort, "ols_slope needs at least 2 points");
  const double t_mean = 0.5 * static_cast<double>(n - 1);
  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= static_cast<double>(n);
  double sty = 0.0;
  double stt = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double dt = static_cast<double>(t) - t_mean;
    sty += dt * (y[t] - y_mean);
    stt += dt * dt;
  }
  const double slope = sty / stt;
  return {slope, y_mean - slope * t_mean};
}

void SlopeRatioConfig::validate() const {
  if (window_minutes < 2) fail(ErrorKind::InvalidArgument, "window_minutes must be at least 2");
  if (n_consecutive < 1) fail(ErrorKind::InvalidArgument, "n_consecutive must be at least 1");
  if (!(pv_slope_epsilon >= 0.0)) fail(ErrorKind::InvalidArgument, "pv_slope_epsilon must be non-negative");
}

std::vector<WindowRegression> slope_ratio_windows(const UniformSeries& series, const SlopeRatioConfig& cfg,
                                                  ExecutionPolicy policy) {
  cfg.validate();
  const auto w = static_cast<std::size_t>(cfg.window_minutes);
  if (series.size() < w)
    fail(ErrorKind::SeriesTooShort, "series has " + std::to_string(series.size()) +
                                        " minutes, one window needs " + std::to_string(w));
  const std::size_t count = series.size() / w;
  std::vector<WindowRegression> out(count);
  const bool par = policy == ExecutionPolicy::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    const std::size_t off = static_cast<std::size_t>(i) * w;
    const auto pv = ols_slope(std::span(series.pv).subspan(off, w));
    const auto op = ols_slope(std::span(series.op).subspan(off, w));
    auto& r = out[static_cast<std::size_t>(i)];
    r.m_pv = pv.slope;
    r.b_pv = pv.intercept;
    r.m_op = op.slope;
    r.b_op = op.intercept;
    r.ratio = std::abs(pv.slope) < cfg.pv_slope_epsilon ? 0.0 : op.slope / pv.slope;
  }
  return out;
}

double stiction_index_beta(std::span<const WindowRegression> regressions, int n, std::size_t i) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "n must be at least 1");
  if (i >= regressions.size()) fail(ErrorKind::InvalidArgument, "window index out of range");
  if (i + 1 < static_cast<std::size_t>(n))
    fail(ErrorKind::InsufficientHistory,
         "window " + std::to_string(i) + " has fewer than " + std::to_string(n) + " windows of history");
  double sum = 0.0;
  for (std::size_t k = i + 1 - static_cast<std::size_t>(n); k <= i; ++k) sum += regressions[k].ratio;
  return sum / n;
}

std::string_view to_string(LabelMethod m) {
  switch (m) {
    case LabelMethod::slope_ratio: return "slope_ratio";
    case LabelMethod::hotelling_t2: return "t2";
    case LabelMethod::ground_truth: return "ground_truth";
  }
  return "slope_ratio";
}

LabelMethod parse_label_method(std::string_view s) {
  if (s == "slope_ratio") return LabelMethod::slope_ratio;
  if (s == "t2" || s == "hotelling_t2") return LabelMethod::hotelling_t2;
  if (s == "ground_truth") return LabelMethod::ground_truth;
  fail(ErrorKind::UnknownKind, "unknown label method '" + std::string(s) + "'");
}

std::vector<LabeledWindow> slope_ratio_labels(const UniformSeries& series, const SlopeRatioConfig& cfg) {
  cfg.validate();
  const auto needed = static_cast<std::size_t>(cfg.n_consecutive) * static_cast<std::size_t>(cfg.window_minutes);
  if (series.size() < needed)
    fail(ErrorKind::SeriesTooShort, "slope-ratio labelling needs at least " + std::to_string(needed) + " minutes");
  const auto reg = slope_ratio_windows(series, cfg);
  const auto n = static_cast<std::size_t>(cfg.n_consecutive);
  std::vector<LabeledWindow> out(reg.size());
  for (std::size_t i = 0; i < reg.size(); ++i) {
    const std::size_t first = i + 1 >= n ? i + 1 - n : 0;
    double sum = 0.0;
    for (std::size_t k = first; k <= i; ++k) sum += reg[k].ratio;
    const double beta = sum / static_cast<double>(i - first + 1);
    auto& lw = out[i];
    lw.window_index = i;
    lw.start_minute = static_cast<std::int64_t>(i) * cfg.window_minutes;
    lw.score = beta;
    lw.label = beta > 0.0 ? 1 : 0;
    lw.method = LabelMethod::slope_ratio;
    lw.warmup = i + 1 < n;
  }
  return out;
}

T2Features t2_features(std::span<const double> op, std::span<const double> pv) {
  if (op.size() != pv.size()) fail(ErrorKind::LengthMismatch, "t2_features: OP and PV differ in length");
  if (op.size() < 2) fail(ErrorKind::SeriesTooShort, "t2_features needs at least 2 points");
  auto summary = [](std::span<const double> y, double* out) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    out[0] = mean;
    out[1] = std::sqrt(ss / static_cast<double>(y.size()));
    out[2] = ols_slope(y).slope;
  };
  T2Features f{};
  summary(op, f.data());
  summary(pv, f.data() + 3);
  return f;
}

std::vector<T2Features> t2_window_features(const UniformSeries& series, int window_minutes,
                                           ExecutionPolicy policy) {
  if (window_minutes < 2) fail(ErrorKind::InvalidArgument, "window_minutes must be at least 2");
  const auto w = static_cast<std::size_t>(window_minutes);
  if (series.size() < w) fail(ErrorKind::SeriesTooShort, "series shorter than one window");
  const std::size_t count = series.size() / w;
  std::vector<T2Features> out(count);
  const bool par = policy == ExecutionPolicy::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    const std::size_t off = static_cast<std::size_t>(i) * w;
    out[static_cast<std::size_t>(i)] =
        t2_features(std::span(series.op).subspan(off, w), std::span(series.pv).subspan(off, w));
  }
  return out;
}

void T2Config::validate() const {
  if (window_minutes < 2) fail(ErrorKind::InvalidArgument, "window_minutes must be at least 2");
  if (!(percentile > 0.0 && percentile < 100.0))
    fail(ErrorKind::InvalidArgument, "percentile must lie strictly inside (0, 100)");
  if (ridge_lambda && !(*ridge_lambda >= 0.0)) fail(ErrorKind::InvalidArgument, "ridge_lambda must be non-negative");
}

HotellingModel HotellingModel::fit(std::span<const T2Features> features, std::optional<double> ridge_lambda) {
  constexpr std::size_t d = 6;
  const std::size_t n = features.size();
  if (n < d + 1) fail(ErrorKind::SeriesTooShort, "Hotelling T2 needs at least 7 windows");

  HotellingModel m;
  for (const auto& x : features)
    for (std::size_t a = 0; a < d; ++a) m.mean_[a] += x[a];
  for (auto& v : m.mean_) v /= static_cast<double>(n);

  std::array<double, 36> cov{};
  for (const auto& x : features)
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b <= a; ++b) cov[a * d + b] += (x[a] - m.mean_[a]) * (x[b] - m.mean_[b]);
  double trace = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b <= a; ++b) cov[a * d + b] /= static_cast<double>(n - 1);
    trace += cov[a * d + a];
  }
  m.ridge_ = ridge_lambda.value_or(1e-6 * trace / static_cast<double>(d));
  for (std::size_t a = 0; a < d; ++a) cov[a * d + a] += m.ridge_;

  // Cholesky, lower triangle.
  auto& L = m.chol_;
  for (std::size_t j = 0; j < d; ++j) {
    double diag = cov[j * d + j];
    for (std::size_t k = 0; k < j; ++k) diag -= L[j * d + k] * L[j * d + k];
    if (!(diag > 0.0) || !std::isfinite(diag))
      fail(ErrorKind::SingularCovariance, "feature covariance is not positive definite");
    L[j * d + j] = std::sqrt(diag);
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = cov[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= L[i * d + k] * L[j * d + k];
      L[i * d + j] = s / L[j * d + j];
    }
  }
  return m;
}

double HotellingModel::score(const T2Features& x) const {
  constexpr std::size_t d = 6;
  // Solve L z = x - mean; the score is |z|^2.
  std::array<double, d> z{};
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double s = x[i] - mean_[i];
    for (std::size_t k = 0; k < i; ++k) s -= chol_[i * d + k] * z[k];
    z[i] = s / chol_[i * d + i];
    total += z[i] * z[i];
  }
  return total;
}

std::vector<double> hotelling_t2(std::span<const T2Features> features, const T2Config& cfg) {
  cfg.validate();
  const auto model = HotellingModel::fit(features, cfg.ridge_lambda);
  std::vector<double> scores(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) scores[i] = model.score(features[i]);
  return scores;
}

double percentile_linear(std::span<const double> values, double p) {
  if (values.empty()) fail(ErrorKind::EmptyInput, "percentile of an empty set");
  if (!(p >= 0.0 && p <= 100.0)) fail(ErrorKind::InvalidArgument, "percentile must lie in [0, 100]");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double rank = p / 100.0 * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - static_cast<double>(lo);
  if (lo + 1 >= s.size()) return s.back();
  return s[lo] + frac * (s[lo + 1] - s[lo]);
}

std::vector<LabeledWindow> t2_threshold_labels(std::span<const double> scores, const T2Config& cfg) {
  cfg.validate();
  const double threshold = percentile_linear(scores, cfg.percentile);
  std::vector<LabeledWindow> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto& lw = out[i];
    lw.window_index = i;
    lw.start_minute = static_cast<std::int64_t>(i) * cfg.window_minutes;
    lw.score = scores[i];
    lw.label = scores[i] > threshold ? 1 : 0;
    lw.method = LabelMethod::hotelling_t2;
  }
  return out;
}

std::vector<LabeledWindow> t2_labels(const UniformSeries& series, const T2Config& cfg) {
  cfg.validate();
  const auto features = t2_window_features(series, cfg.window_minutes);
  return t2_threshold_labels(hotelling_t2(features, cfg), cfg);
}

std::vector<LabeledWindow> ground_truth_labels(std::span<const std::uint8_t> flags, int window_minutes) {
  if (window_minutes < 1) fail(ErrorKind::InvalidArgument, "window_minutes must be positive");
  const auto w = static_cast<std::size_t>(window_minutes);
  if (flags.size() < w) fail(ErrorKind::SeriesTooShort, "ground truth shorter than one window");
  std::vector<LabeledWindow> out(flags.size() / w);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t on = 0;
    for (std::size_t k = 0; k < w; ++k) on += flags[i * w + k] ? 1 : 0;
    auto& lw = out[i];
    lw.window_index = i;
    lw.start_minute = static_cast<std::int64_t>(i * w);
    lw.score = static_cast<double>(on) / static_cast<double>(w);
    lw.label = 2 * on > w ? 1 : 0;
    lw.method = LabelMethod::ground_truth;
  }
  return out;
}

void write_labels(std::ostream& out, std::span<const LabeledWindow> labels, Minute t0) {
  out << "window_index,start_timestamp,score,label,method,warmup\n";
  for (const auto& lw : labels) {
    out << lw.window_index << ',' << format_timestamp(t0 + lw.start_minute) << ',' << format_double(lw.score)
        << ',' << lw.label << ',' << to_string(lw.method) << ',' << (lw.warmup ? 1 : 0) << '\n';
  }
  if (!out) fail(ErrorKind::IoFailure, "failed writing labels");
}

std::vector<LabeledWindow> read_labels(std::istream& in, Minute t0) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) fail(ErrorKind::EmptyInput, "label file is empty");
  ++lineno;
  std::vector<LabeledWindow> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    const auto where = "label file line " + std::to_string(lineno);
    if (f.size() < 6) fail(ErrorKind::FormatError, where + ": expected 6 columns");
    const auto idx = parse_int(f[0]);
    const auto t = parse_timestamp(f[1]);
    const auto score = parse_double(f[2]);
    const auto label = parse_int(f[3]);
    const auto warm = parse_int(f[5]);
    if (!idx || *idx < 0 || !score || !label || (*label != 0 && *label != 1) || !warm)
      fail(ErrorKind::FormatError, where + ": malformed row");
    if (!t) fail(ErrorKind::UnparseableTimestamp, where + ": bad timestamp");
    LabeledWindow lw;
    lw.window_index = static_cast<std::size_t>(*idx);
    lw.start_minute = *t - t0;
    lw.score = *score;
    lw.label = static_cast<int>(*label);
    lw.method = parse_label_method(f[4]);
    lw.warmup = *warm != 0;
    out.push_back(lw);
  }
  return out;
}

}  // namespace stiction
