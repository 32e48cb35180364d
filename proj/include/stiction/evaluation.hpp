#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stiction/labeling.hpp"
#include "stiction/models.hpp"
#include "stiction/windowing.hpp"

namespace stiction {

// Stiction (label 1) is the positive class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  // The same tallies with non-stiction as the positive class.
  ConfusionCounts swapped() const { return {tn, fn, tp, fp}; }
};

// Throws Error(LengthMismatch) or Error(EmptyInput).
ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> actual);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct MetricReport {
  ConfusionCounts counts;
  double accuracy = 0.0;
  ClassMetrics stiction;
  ClassMetrics non_stiction;
  ClassMetrics macro;
  ClassMetrics weighted;
};

// Zero denominators give 0.
MetricReport metrics(const ConfusionCounts& counts);

// `key: value` lines in a fixed order, values rounded to 4 decimals.
// `context` lines are written first, verbatim.
void write_report(std::ostream& out, const MetricReport& report,
                  std::span<const std::pair<std::string, std::string>> context = {});

struct TraceRow {
  std::size_t window_index = 0;
  Minute start;
  int actual = 0;
  int predicted = 0;
  double probability = 0.0;
};

// `window_index,start_timestamp,actual,predicted,probability`
void export_trace(std::ostream& out, std::span<const TraceRow> rows);
std::vector<TraceRow> read_trace(std::istream& in);

// Predictions for samples [begin, end). The window index is the first
// base window of each sample's input span.
std::vector<TraceRow> predict_trace(const Model& model, const WindowDataset& data, std::size_t begin, std::size_t end);

ConfusionCounts confusion(std::span<const TraceRow> rows);

struct HeatmapCell {
  int detect = 0;
  int lookahead = 0;
  std::uint64_t seed = 0;
  std::optional<double> accuracy;  // absent when the cell failed
  int epochs_used = 0;
  std::size_t samples = 0;
  std::size_t test_samples = 0;
  std::string failure;
};

// Cells for D = 1..4 (rows) and K = 1..4 (columns).
struct HeatmapGrid {
  std::array<HeatmapCell, 16> cells;

  HeatmapCell& at(int detect, int lookahead) { return cells[static_cast<std::size_t>((detect - 1) * 4 + lookahead - 1)]; }
  const HeatmapCell& at(int detect, int lookahead) const {
    return cells[static_cast<std::size_t>((detect - 1) * 4 + lookahead - 1)];
  }
};

// Trains a fresh model for one cell's dataset and seed.
using ModelFactory = std::function<Model(const WindowDataset& data, std::uint64_t seed)>;

// For each (D, K): pair, split, train with seed + 16 D + K, and record the
// test-block accuracy. Errors in a cell are recorded, not rethrown.
HeatmapGrid heatmap(const ModelFactory& factory, const UniformSeries& series, std::span<const LabeledWindow> labels,
                    const WindowSpec& base, std::uint64_t seed);

// Header `detect,k1,k2,k3,k4`; absent cells are written as NA.
void write_heatmap(std::ostream& out, const HeatmapGrid& grid);

}  // namespace stiction
