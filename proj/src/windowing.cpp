#include "stiction/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "stiction/binio.hpp"

namespace stiction {

void WindowSpec::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorKind::InvalidArgument, m); };
  if (base_minutes < 2) bad("base window must be at least 2 minutes");
  if (stride_minutes != base_minutes) bad("stride must equal the base window");
  if (model_len < 2 || model_len > base_minutes) bad("model length must lie in [2, base window]");
  if (detect < 1) bad("detect windows must be at least 1");
  if (lookahead < 1) bad("lookahead windows must be at least 1");
}

std::vector<std::size_t> decimation_indices(std::size_t window_len, std::size_t l) {
  if (l < 2 || l > window_len) fail(ErrorKind::InvalidArgument, "decimation length must lie in [2, window]");
  std::vector<std::size_t> idx(l);
  for (std::size_t i = 0; i < l; ++i)
    idx[i] = static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(window_len - 1) / static_cast<double>(l - 1)));
  return idx;
}

std::vector<double> decimate_window(std::span<const double> window, std::size_t l) {
  if (window.size() % kChannels != 0) fail(ErrorKind::ShapeMismatch, "window must have 2 channels");
  const auto idx = decimation_indices(window.size() / kChannels, l);
  std::vector<double> out(l * kChannels);
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t c = 0; c < kChannels; ++c) out[i * kChannels + c] = window[idx[i] * kChannels + c];
  return out;
}

namespace {

// Every full base window decimated to L x 2 (PV, OP).
std::vector<std::vector<double>> decimated_windows(const UniformSeries& series, const WindowSpec& spec,
                                                   std::size_t count) {
  const auto w = static_cast<std::size_t>(spec.base_minutes);
  const auto l = static_cast<std::size_t>(spec.model_len);
  const auto idx = decimation_indices(w, l);
  std::vector<std::vector<double>> out(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    auto& dst = out[static_cast<std::size_t>(i)];
    dst.resize(l * kChannels);
    const std::size_t off = static_cast<std::size_t>(i) * w;
    for (std::size_t r = 0; r < l; ++r) {
      dst[r * kChannels + 0] = series.pv[off + idx[r]];
      dst[r * kChannels + 1] = series.op[off + idx[r]];
    }
  }
  return out;
}

void check_alignment(const UniformSeries& series, std::span<const LabeledWindow> labels, const WindowSpec& spec) {
  const auto w = static_cast<std::size_t>(spec.base_minutes);
  const std::size_t windows = series.size() / w;
  if (labels.size() != windows)
    fail(ErrorKind::LabelMisalignment, std::to_string(labels.size()) + " labels for " + std::to_string(windows) +
                                           " windows of " + std::to_string(w) + " minutes");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].window_index != i || labels[i].start_minute != static_cast<std::int64_t>(i * w))
      fail(ErrorKind::LabelMisalignment, "label " + std::to_string(i) + " does not start at minute " +
                                             std::to_string(i * w));
  }
}

Sample assemble(const std::vector<std::vector<double>>& windows, std::size_t first, std::size_t d,
                const WindowSpec& spec) {
  Sample s;
  s.origin = static_cast<std::int64_t>(first) * spec.base_minutes;
  s.input.reserve(d * windows[first].size());
  for (std::size_t k = first; k < first + d; ++k) s.input.insert(s.input.end(), windows[k].begin(), windows[k].end());
  return s;
}

}  // namespace

std::vector<Sample> segment_detection_samples(const UniformSeries& series, std::span<const LabeledWindow> labels,
                                              const WindowSpec& spec) {
  spec.validate();
  check_alignment(series, labels, spec);
  const auto d = static_cast<std::size_t>(spec.detect);
  if (labels.size() < d) fail(ErrorKind::SeriesTooShort, "fewer windows than the detect span");
  const auto windows = decimated_windows(series, spec, labels.size());
  std::vector<Sample> out;
  out.reserve(labels.size() - d + 1);
  for (std::size_t i = d - 1; i < labels.size(); ++i) {
    Sample s = assemble(windows, i + 1 - d, d, spec);
    s.label = labels[i].label;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<int> lookahead_labels(std::span<const int> window_labels, int detect, int lookahead) {
  if (detect < 1 || lookahead < 1) fail(ErrorKind::InvalidArgument, "detect and lookahead must be positive");
  const auto n = window_labels.size();
  const auto d = static_cast<std::size_t>(detect);
  const auto k = static_cast<std::size_t>(lookahead);
  if (n < d + k) fail(ErrorKind::SeriesTooShort, "series too short for one detect/lookahead pair");
  std::vector<int> out(n - d - k + 1);
  for (std::size_t p = 0; p < out.size(); ++p) {
    int any = 0;
    for (std::size_t j = p + d; j < p + d + k; ++j) any |= window_labels[j] != 0 ? 1 : 0;
    out[p] = any;
  }
  return out;
}

std::vector<Sample> pair_detect_lookahead(const UniformSeries& series, std::span<const LabeledWindow> labels,
                                          const WindowSpec& spec) {
  spec.validate();
  check_alignment(series, labels, spec);
  std::vector<int> flat(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) flat[i] = labels[i].label;
  const auto y = lookahead_labels(flat, spec.detect, spec.lookahead);
  const auto windows = decimated_windows(series, spec, labels.size());
  std::vector<Sample> out;
  out.reserve(y.size());
  for (std::size_t p = 0; p < y.size(); ++p) {
    Sample s = assemble(windows, p, static_cast<std::size_t>(spec.detect), spec);
    s.label = y[p];
    out.push_back(std::move(s));
  }
  return out;
}

std::string_view to_string(DatasetMode m) { return m == DatasetMode::detect ? "detect" : "predict"; }

DatasetMode parse_dataset_mode(std::string_view s) {
  if (s == "detect") return DatasetMode::detect;
  if (s == "predict") return DatasetMode::predict;
  fail(ErrorKind::InvalidArgument, "unknown dataset mode '" + std::string(s) + "'");
}

double ChannelStats::scale() const {
  return std > 1e-12 * std::max(1.0, std::abs(mean)) ? std : 1.0;
}

WindowDataset split_normalize(std::span<const Sample> samples, const WindowSpec& spec, DatasetMode mode, Minute t0) {
  spec.validate();
  const std::size_t n = samples.size();
  if (n < 5) fail(ErrorKind::EmptySplit, "need at least 5 samples for a 60:20:20 split, got " + std::to_string(n));
  WindowDataset ds;
  ds.spec = spec;
  ds.mode = mode;
  ds.t0 = t0;
  ds.rows = samples.front().input.size() / kChannels;
  ds.train_end = static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(n)));
  ds.val_end = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
  ds.inputs.reserve(n * ds.sample_width());
  for (const auto& s : samples) {
    if (s.input.size() != ds.sample_width()) fail(ErrorKind::ShapeMismatch, "samples differ in shape");
    ds.inputs.insert(ds.inputs.end(), s.input.begin(), s.input.end());
    ds.labels.push_back(s.label);
    ds.origins.push_back(s.origin);
  }

  const std::size_t train_values = ds.train_end * ds.rows;
  for (std::size_t c = 0; c < kChannels; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < train_values; ++i) mean += ds.inputs[i * kChannels + c];
    mean /= static_cast<double>(train_values);
    double ss = 0.0;
    for (std::size_t i = 0; i < train_values; ++i) {
      const double dv = ds.inputs[i * kChannels + c] - mean;
      ss += dv * dv;
    }
    ds.norm[c] = {mean, std::sqrt(ss / static_cast<double>(train_values))};
  }
  const std::size_t total = n * ds.rows;
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t c = 0; c < kChannels; ++c) {
      auto& v = ds.inputs[i * kChannels + c];
      v = (v - ds.norm[c].mean) / ds.norm[c].scale();
    }
  return ds;
}

void write_dataset(std::ostream& out, const WindowDataset& ds) {
  using namespace binio;
  write_magic(out, "SGW1");
  write_u32(out, 1);
  write_u32(out, ds.mode == DatasetMode::detect ? 0 : 1);
  write_u32(out, static_cast<std::uint32_t>(ds.spec.base_minutes));
  write_u32(out, static_cast<std::uint32_t>(ds.spec.stride_minutes));
  write_u32(out, static_cast<std::uint32_t>(ds.spec.model_len));
  write_u32(out, static_cast<std::uint32_t>(ds.spec.detect));
  write_u32(out, static_cast<std::uint32_t>(ds.spec.lookahead));
  write_i64(out, ds.t0.value);
  write_u64(out, ds.size());
  write_u64(out, ds.rows);
  write_u64(out, kChannels);
  write_u64(out, ds.train_end);
  write_u64(out, ds.val_end);
  for (const auto& c : ds.norm) {
    write_f64(out, c.mean);
    write_f64(out, c.std);
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    write_i64(out, ds.origins[i]);
    write_u8(out, static_cast<std::uint8_t>(ds.labels[i]));
    write_f64s(out, ds.input(i));
  }
  if (!out) fail(ErrorKind::IoFailure, "failed writing dataset");
}

WindowDataset read_dataset(std::istream& in) {
  using namespace binio;
  expect_magic(in, "SGW1");
  if (read_u32(in) != 1) fail(ErrorKind::FormatError, "unsupported dataset version");
  WindowDataset ds;
  const auto mode = read_u32(in);
  if (mode > 1) fail(ErrorKind::FormatError, "bad dataset mode");
  ds.mode = mode == 0 ? DatasetMode::detect : DatasetMode::predict;
  ds.spec.base_minutes = static_cast<int>(read_u32(in));
  ds.spec.stride_minutes = static_cast<int>(read_u32(in));
  ds.spec.model_len = static_cast<int>(read_u32(in));
  ds.spec.detect = static_cast<int>(read_u32(in));
  ds.spec.lookahead = static_cast<int>(read_u32(in));
  ds.t0 = Minute{read_i64(in)};
  const auto n = read_u64(in);
  ds.rows = read_u64(in);
  if (read_u64(in) != kChannels) fail(ErrorKind::FormatError, "dataset must have 2 channels");
  ds.train_end = read_u64(in);
  ds.val_end = read_u64(in);
  if (ds.rows != ds.spec.input_rows() || ds.train_end > ds.val_end || ds.val_end > n || n > (1ULL << 32))
    fail(ErrorKind::FormatError, "inconsistent dataset header");
  for (auto& c : ds.norm) {
    c.mean = read_f64(in);
    c.std = read_f64(in);
  }
  ds.inputs.reserve(n * ds.sample_width());
  for (std::size_t i = 0; i < n; ++i) {
    ds.origins.push_back(read_i64(in));
    const auto label = read_u8(in);
    if (label > 1) fail(ErrorKind::FormatError, "label must be 0 or 1");
    ds.labels.push_back(label);
    const auto x = read_f64s(in, ds.sample_width());
    ds.inputs.insert(ds.inputs.end(), x.begin(), x.end());
  }
  return ds;
}

void write_dataset_manifest(std::ostream& out, const WindowDataset& ds) {
  std::size_t positives = 0;
  for (int y : ds.labels) positives += y ? 1 : 0;
  out << "format: SGW1\n"
      << "mode: " << to_string(ds.mode) << '\n'
      << "start: " << format_timestamp(ds.t0) << '\n'
      << "base_minutes: " << ds.spec.base_minutes << '\n'
      << "stride_minutes: " << ds.spec.stride_minutes << '\n'
      << "model_len: " << ds.spec.model_len << '\n'
      << "decimation: uniform index selection round(i*(W-1)/(L-1))\n"
      << "detect_windows: " << ds.spec.detect << '\n'
      << "lookahead_windows: " << ds.spec.lookahead << '\n'
      << "input_shape: " << ds.rows << "x2 (PV, OP)\n"
      << "samples: " << ds.size() << '\n'
      << "positive_samples: " << positives << '\n'
      << "train: [0, " << ds.train_end << ")\n"
      << "validation: [" << ds.train_end << ", " << ds.val_end << ")\n"
      << "test: [" << ds.val_end << ", " << ds.size() << ")\n"
      << "pv_mean: " << format_double(ds.norm[0].mean) << '\n'
      << "pv_std: " << format_double(ds.norm[0].std) << '\n'
      << "op_mean: " << format_double(ds.norm[1].mean) << '\n'
      << "op_std: " << format_double(ds.norm[1].std) << '\n';
}

}  // namespace stiction
