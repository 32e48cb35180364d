#include "stiction/evaluation.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "stiction/config.hpp"
#include "stiction/error.hpp"

namespace stiction {
namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

ClassMetrics class_metrics(double tp, double fp, double fn) {
  ClassMetrics m;
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
  m.support = static_cast<std::uint64_t>(tp + fn);
  return m;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

ConfusionCounts confusion(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) fail(ErrorKind::LengthMismatch, "predicted and actual differ in length");
  if (predicted.empty()) fail(ErrorKind::EmptyInput, "no predictions to evaluate");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0, a = actual[i] != 0;
    if (p && a) ++c.tp;
    else if (p) ++c.fp;
    else if (a) ++c.fn;
    else ++c.tn;
  }
  return c;
}

ConfusionCounts confusion(std::span<const TraceRow> rows) {
  std::vector<int> p, a;
  for (const auto& r : rows) {
    p.push_back(r.predicted);
    a.push_back(r.actual);
  }
  return confusion(p, a);
}

MetricReport metrics(const ConfusionCounts& c) {
  if (c.total() == 0) fail(ErrorKind::EmptyInput, "metrics of an empty confusion matrix");
  const auto tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const auto tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
  const double total = static_cast<double>(c.total());
  MetricReport r;
  r.counts = c;
  r.accuracy = (tp + tn) / total;
  r.stiction = class_metrics(tp, fp, fn);
  r.non_stiction = class_metrics(tn, fn, fp);
  const double ws = static_cast<double>(r.stiction.support) / total;
  const double wn = static_cast<double>(r.non_stiction.support) / total;
  r.macro.precision = 0.5 * (r.stiction.precision + r.non_stiction.precision);
  r.macro.recall = 0.5 * (r.stiction.recall + r.non_stiction.recall);
  r.macro.f1 = 0.5 * (r.stiction.f1 + r.non_stiction.f1);
  r.macro.support = c.total();
  r.weighted.precision = ws * r.stiction.precision + wn * r.non_stiction.precision;
  r.weighted.recall = ws * r.stiction.recall + wn * r.non_stiction.recall;
  r.weighted.f1 = ws * r.stiction.f1 + wn * r.non_stiction.f1;
  r.weighted.support = c.total();
  return r;
}

void write_report(std::ostream& out, const MetricReport& r,
                  std::span<const std::pair<std::string, std::string>> context) {
  for (const auto& [k, v] : context) out << k << ": " << v << '\n';
  out << "samples: " << r.counts.total() << '\n'
      << "tp: " << r.counts.tp << '\n'
      << "fp: " << r.counts.fp << '\n'
      << "tn: " << r.counts.tn << '\n'
      << "fn: " << r.counts.fn << '\n'
      << "accuracy: " << fixed4(r.accuracy) << '\n';
  auto block = [&](const char* name, const ClassMetrics& m) {
    out << name << "_precision: " << fixed4(m.precision) << '\n'
        << name << "_recall: " << fixed4(m.recall) << '\n'
        << name << "_f1: " << fixed4(m.f1) << '\n'
        << name << "_support: " << m.support << '\n';
  };
  block("stiction", r.stiction);
  block("non_stiction", r.non_stiction);
  block("macro_avg", r.macro);
  block("weighted_avg", r.weighted);
  if (!out) fail(ErrorKind::IoFailure, "failed writing metric report");
}

void export_trace(std::ostream& out, std::span<const TraceRow> rows) {
  out << "window_index,start_timestamp,actual,predicted,probability\n";
  for (const auto& r : rows)
    out << r.window_index << ',' << format_timestamp(r.start) << ',' << r.actual << ',' << r.predicted << ','
        << format_double(r.probability) << '\n';
  if (!out) fail(ErrorKind::IoFailure, "failed writing prediction trace");
}

std::vector<TraceRow> read_trace(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) fail(ErrorKind::EmptyInput, "trace file is empty");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    const auto where = "trace line " + std::to_string(lineno);
    if (f.size() != 5) fail(ErrorKind::FormatError, where + ": expected 5 columns");
    const auto idx = parse_int(f[0]);
    const auto t = parse_timestamp(f[1]);
    const auto a = parse_int(f[2]);
    const auto p = parse_int(f[3]);
    const auto prob = parse_double(f[4]);
    if (!t) fail(ErrorKind::UnparseableTimestamp, where + ": bad timestamp");
    if (!idx || *idx < 0 || !a || !p || !prob || (*a != 0 && *a != 1) || (*p != 0 && *p != 1))
      fail(ErrorKind::FormatError, where + ": malformed row");
    rows.push_back({static_cast<std::size_t>(*idx), *t, static_cast<int>(*a), static_cast<int>(*p), *prob});
  }
  return rows;
}

std::vector<TraceRow> predict_trace(const Model& model, const WindowDataset& data, std::size_t begin,
                                    std::size_t end) {
  if (begin > end || end > data.size()) fail(ErrorKind::InvalidArgument, "trace range out of bounds");
  if (model.input_rows != data.rows)
    fail(ErrorKind::ShapeMismatch, "model expects " + std::to_string(model.input_rows) + " input rows, dataset has " +
                                       std::to_string(data.rows));
  std::vector<TraceRow> rows(end - begin);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(rows.size()); ++k) {
    const std::size_t i = begin + static_cast<std::size_t>(k);
    const auto p = model.predict(data.input(i));
    auto& r = rows[static_cast<std::size_t>(k)];
    r.window_index = static_cast<std::size_t>(data.origins[i] / data.spec.base_minutes);
    r.start = data.t0 + data.origins[i];
    r.actual = data.labels[i];
    r.predicted = p.label;
    r.probability = p.probability;
  }
  return rows;
}

HeatmapGrid heatmap(const ModelFactory& factory, const UniformSeries& series, std::span<const LabeledWindow> labels,
                    const WindowSpec& base, std::uint64_t seed) {
  HeatmapGrid grid;
  for (int d = 1; d <= 4; ++d) {
    for (int k = 1; k <= 4; ++k) {
      auto& cell = grid.at(d, k);
      cell.detect = d;
      cell.lookahead = k;
      cell.seed = seed + 16 * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(k);
      try {
        WindowSpec spec = base;
        spec.detect = d;
        spec.lookahead = k;
        const auto samples = pair_detect_lookahead(series, labels, spec);
        const auto data = split_normalize(samples, spec, DatasetMode::predict, series.t0);
        cell.samples = data.size();
        const Model model = factory(data, cell.seed);
        cell.epochs_used = static_cast<int>(model.history.epochs.size());
        const auto rows = predict_trace(model, data, data.val_end, data.size());
        cell.test_samples = rows.size();
        if (rows.empty()) fail(ErrorKind::EmptySplit, "test split is empty");
        std::size_t correct = 0;
        for (const auto& r : rows) correct += r.actual == r.predicted ? 1 : 0;
        cell.accuracy = static_cast<double>(correct) / static_cast<double>(rows.size());
      } catch (const Error& e) {
        cell.accuracy.reset();
        cell.failure = std::string(to_string(e.kind())) + ": " + e.what();
      }
    }
  }
  return grid;
}

void write_heatmap(std::ostream& out, const HeatmapGrid& grid) {
  out << "detect,k1,k2,k3,k4\n";
  for (int d = 1; d <= 4; ++d) {
    out << d;
    for (int k = 1; k <= 4; ++k) {
      const auto& c = grid.at(d, k);
      out << ',' << (c.accuracy ? fixed4(*c.accuracy) : std::string("NA"));
    }
    out << '\n';
  }
  if (!out) fail(ErrorKind::IoFailure, "failed writing heatmap");
}

}  // namespace stiction
