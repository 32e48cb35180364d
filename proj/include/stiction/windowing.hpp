#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "stiction/execution.hpp"
#include "stiction/labeling.hpp"
#include "stiction/seriesio.hpp"

namespace stiction {

struct WindowSpec {
  int base_minutes = 60;
  int stride_minutes = 60;
  int model_len = 24;  // L, rows kept per base window
  int detect = 1;      // D, windows of input
  int lookahead = 1;   // K, windows forecast

  void validate() const;
  std::size_t input_rows() const { return static_cast<std::size_t>(detect) * static_cast<std::size_t>(model_len); }
};

// Rows kept when decimating a W-row window to l rows: round(i (W-1)/(l-1)).
std::vector<std::size_t> decimation_indices(std::size_t window_len, std::size_t l);

// `window` is W x 2 row-major; returns l x 2 row-major.
std::vector<double> decimate_window(std::span<const double> window, std::size_t l);

struct Sample {
  std::vector<double> input;  // (D*L) x 2, row-major, channels (PV, OP)
  int label = 0;
  std::int64_t origin = 0;  // first minute of the input span, from series start
};

// One sample per labelled window (D consecutive windows ending at it when
// D > 1). Throws Error(LabelMisalignment) if the labels do not tile the
// series with the spec's base window.
std::vector<Sample> segment_detection_samples(const UniformSeries& series, std::span<const LabeledWindow> labels,
                                              const WindowSpec& spec);

// Sample p: input = windows p..p+D-1, label = 1 iff any of windows
// p+D..p+D+K-1 is labelled 1. Count = N - D - K + 1.
// Throws Error(SeriesTooShort) if no complete pair exists.
std::vector<Sample> pair_detect_lookahead(const UniformSeries& series, std::span<const LabeledWindow> labels,
                                          const WindowSpec& spec);

// Labels only, for checking the pairing rule without building inputs.
std::vector<int> lookahead_labels(std::span<const int> window_labels, int detect, int lookahead);

enum class DatasetMode { detect, predict };
std::string_view to_string(DatasetMode m);
DatasetMode parse_dataset_mode(std::string_view s);

struct ChannelStats {
  double mean = 0.0;
  double std = 1.0;  // population std over the training block

  // Divisor applied during normalisation; 1 when the channel is constant.
  double scale() const;
};

inline constexpr std::size_t kChannels = 2;  // PV, OP

// Samples packed contiguously with a chronological train/val/test split.
struct WindowDataset {
  WindowSpec spec;
  DatasetMode mode = DatasetMode::detect;
  Minute t0;
  std::size_t rows = 0;  // D * L
  std::vector<double> inputs;  // size() * rows * 2
  std::vector<int> labels;
  std::vector<std::int64_t> origins;
  std::size_t train_end = 0;
  std::size_t val_end = 0;
  std::array<ChannelStats, kChannels> norm{};

  std::size_t size() const { return labels.size(); }
  std::size_t sample_width() const { return rows * kChannels; }
  std::span<const double> input(std::size_t i) const {
    return std::span(inputs).subspan(i * sample_width(), sample_width());
  }
};

// train_end = round(0.6 n), val_end = round(0.8 n). Channel statistics use
// the training block only. Requires n >= 5; throws Error(EmptySplit).
WindowDataset split_normalize(std::span<const Sample> samples, const WindowSpec& spec, DatasetMode mode, Minute t0);

void write_dataset(std::ostream& out, const WindowDataset& ds);
WindowDataset read_dataset(std::istream& in);
void write_dataset_manifest(std::ostream& out, const WindowDataset& ds);

}  // namespace stiction
