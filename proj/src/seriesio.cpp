#include "stiction/seriesio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>

#include "stiction/config.hpp"

namespace stiction {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Reads the next non-blank line; strips a UTF-8 byte-order mark on line 1.
bool next_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) return true;
  }
  return false;
}

struct Columns {
  char delim = ',';
  std::vector<std::string> names;
};

Columns read_header(std::istream& in, std::size_t& lineno, const char* what) {
  std::string line;
  if (!next_line(in, line, lineno)) fail(ErrorKind::EmptyInput, std::string(what) + ": no header row");
  Columns cols;
  cols.delim = line.find('\t') != std::string::npos ? '\t' : ',';
  for (auto f : split(line, cols.delim)) cols.names.push_back(lower(f));
  return cols;
}

std::size_t column_index(const Columns& cols, std::string_view name, std::size_t fallback) {
  for (std::size_t i = 0; i < cols.names.size(); ++i)
    if (cols.names[i] == name) return i;
  return fallback;
}

}  // namespace

std::string_view to_string(FillFlag f) {
  switch (f) {
    case FillFlag::observed: return "obs";
    case FillFlag::forward_filled: return "ffill";
    case FillFlag::backward_filled: return "bfill";
  }
  return "obs";
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

RawSeries parse_raw(std::istream& in, SignalKind kind, std::string unit) {
  RawSeries raw;
  raw.kind = kind;
  raw.unit = std::move(unit);

  std::size_t lineno = 0;
  const Columns cols = read_header(in, lineno, "raw series");
  const std::size_t ts_col = column_index(cols, "timestamp", 0);
  const std::size_t val_col = column_index(cols, "value", ts_col == 0 ? 1 : 0);

  std::size_t rows = 0;
  std::size_t bad_timestamps = 0;
  std::string line;
  while (next_line(in, line, lineno)) {
    ++rows;
    const auto fields = split(line, cols.delim);
    if (fields.size() <= std::max(ts_col, val_col)) {
      raw.diagnostics.push_back({lineno, ErrorKind::FormatError, "missing column"});
      continue;
    }
    const auto t = parse_timestamp(fields[ts_col]);
    if (!t) {
      ++bad_timestamps;
      raw.diagnostics.push_back({lineno, ErrorKind::UnparseableTimestamp,
                                 "cannot parse timestamp '" + std::string(fields[ts_col]) + "'"});
      continue;
    }
    const auto v = parse_double(fields[val_col]);
    if (!v) {
      raw.diagnostics.push_back({lineno, ErrorKind::NonNumericValue,
                                 "not a finite number '" + std::string(fields[val_col]) + "'"});
      continue;
    }
    raw.points.push_back({*t, *v});
  }

  if (raw.points.empty()) {
    if (rows > 0 && bad_timestamps == rows)
      fail(ErrorKind::UnparseableTimestamp, "no row has a parseable timestamp");
    fail(ErrorKind::EmptyInput, "no valid rows");
  }

  std::stable_sort(raw.points.begin(), raw.points.end(),
                   [](const RawPoint& a, const RawPoint& b) { return a.time < b.time; });
  // Keep the last row of each run of equal minutes.
  std::vector<RawPoint> unique;
  unique.reserve(raw.points.size());
  for (const auto& p : raw.points) {
    if (!unique.empty() && unique.back().time == p.time)
      unique.back() = p;
    else
      unique.push_back(p);
  }
  raw.points = std::move(unique);
  return raw;
}

FilledSignal resample_fill(const RawSeries& raw) {
  if (raw.points.empty()) fail(ErrorKind::EmptyInput, "resample_fill: no points");
  return resample_fill(raw, raw.first_time(), raw.last_time());
}

FilledSignal resample_fill(const RawSeries& raw, Minute axis_start, Minute axis_end) {
  if (raw.points.empty()) fail(ErrorKind::EmptyInput, "resample_fill: no points");
  if (axis_start > raw.first_time() || axis_end < raw.last_time())
    fail(ErrorKind::InvalidArgument, "resample_fill: axis does not cover the series");

  const auto n = static_cast<std::size_t>(axis_end - axis_start + 1);
  FilledSignal out;
  out.values.resize(n);
  out.mask.resize(n);

  std::size_t next = 0;  // first point not yet consumed
  double carried = raw.points.front().value;
  for (std::size_t j = 0; j < n; ++j) {
    const Minute t = axis_start + static_cast<std::int64_t>(j);
    if (next < raw.points.size() && raw.points[next].time == t) {
      carried = raw.points[next].value;
      out.values[j] = carried;
      out.mask[j] = FillFlag::observed;
      ++next;
    } else {
      out.values[j] = carried;
      out.mask[j] = next == 0 ? FillFlag::backward_filled : FillFlag::forward_filled;
    }
  }
  return out;
}

void UniformSeries::validate() const {
  const auto n = op.size();
  if (n == 0) fail(ErrorKind::EmptyInput, "series is empty");
  if (pv.size() != n || op_fill.size() != n || pv_fill.size() != n)
    fail(ErrorKind::LengthMismatch, "series columns differ in length");
  for (const auto* mask : {&op_fill, &pv_fill}) {
    bool prefix = true;
    for (auto f : *mask) {
      if (f != FillFlag::backward_filled) prefix = false;
      else if (!prefix) fail(ErrorKind::FormatError, "backward fill outside the leading prefix");
    }
  }
}

UniformSeries UniformSeries::dense(Minute t0, std::vector<double> op, std::vector<double> pv) {
  if (op.size() != pv.size()) fail(ErrorKind::LengthMismatch, "op and pv differ in length");
  UniformSeries s;
  s.t0 = t0;
  s.op_fill.assign(op.size(), FillFlag::observed);
  s.pv_fill.assign(op.size(), FillFlag::observed);
  s.op = std::move(op);
  s.pv = std::move(pv);
  return s;
}

UniformSeries merge_op_pv(const RawSeries& op, const RawSeries& pv) {
  if (op.points.empty() || pv.points.empty()) fail(ErrorKind::EmptyInput, "merge: empty signal");
  const Minute start = std::min(op.first_time(), pv.first_time());
  const Minute end = std::max(op.last_time(), pv.last_time());
  auto fo = resample_fill(op, start, end);
  auto fp = resample_fill(pv, start, end);
  UniformSeries s;
  s.t0 = start;
  s.op = std::move(fo.values);
  s.op_fill = std::move(fo.mask);
  s.pv = std::move(fp.values);
  s.pv_fill = std::move(fp.mask);
  return s;
}

void write_unified(std::ostream& out, const UniformSeries& series) {
  out << "timestamp,op,pv,op_fill,pv_fill\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << format_timestamp(series.time_at(i)) << ',' << format_double(series.op[i]) << ','
        << format_double(series.pv[i]) << ',' << to_string(series.op_fill[i]) << ','
        << to_string(series.pv_fill[i]) << '\n';
  }
  if (!out) fail(ErrorKind::IoFailure, "failed writing unified table");
}

UniformSeries read_unified(std::istream& in) {
  std::size_t lineno = 0;
  const Columns cols = read_header(in, lineno, "unified table");
  const std::size_t c_ts = column_index(cols, "timestamp", cols.names.size());
  const std::size_t c_op = column_index(cols, "op", cols.names.size());
  const std::size_t c_pv = column_index(cols, "pv", cols.names.size());
  const std::size_t c_of = column_index(cols, "op_fill", cols.names.size());
  const std::size_t c_pf = column_index(cols, "pv_fill", cols.names.size());
  if (std::max({c_ts, c_op, c_pv}) >= cols.names.size())
    fail(ErrorKind::FormatError, "unified table needs timestamp, op and pv columns");

  auto parse_flag = [&](std::string_view s) {
    if (s == "obs") return FillFlag::observed;
    if (s == "ffill") return FillFlag::forward_filled;
    if (s == "bfill") return FillFlag::backward_filled;
    fail(ErrorKind::FormatError, "line " + std::to_string(lineno) + ": bad fill flag");
  };

  UniformSeries s;
  std::string line;
  while (next_line(in, line, lineno)) {
    const auto f = split(line, cols.delim);
    if (f.size() < cols.names.size())
      fail(ErrorKind::FormatError, "line " + std::to_string(lineno) + ": missing column");
    const auto t = parse_timestamp(f[c_ts]);
    if (!t) fail(ErrorKind::UnparseableTimestamp, "line " + std::to_string(lineno) + ": bad timestamp");
    if (s.op.empty()) {
      s.t0 = *t;
    } else if (*t != s.time_at(s.op.size())) {
      fail(ErrorKind::FormatError, "line " + std::to_string(lineno) + ": axis is not uniform");
    }
    const auto op = parse_double(f[c_op]);
    const auto pv = parse_double(f[c_pv]);
    if (!op || !pv) fail(ErrorKind::NonNumericValue, "line " + std::to_string(lineno) + ": bad value");
    s.op.push_back(*op);
    s.pv.push_back(*pv);
    s.op_fill.push_back(c_of < f.size() ? parse_flag(f[c_of]) : FillFlag::observed);
    s.pv_fill.push_back(c_pf < f.size() ? parse_flag(f[c_pf]) : FillFlag::observed);
  }
  if (s.op.empty()) fail(ErrorKind::EmptyInput, "unified table has no rows");
  s.validate();
  return s;
}

}  // namespace stiction
