#pragma once

/// \file seriesio.hpp
/// \brief Historian export parsing and the per-minute unified OP/PV table.
///
/// Raw exports are delimited text (comma or tab, detected from the header)
/// with a `timestamp` and a `value` column. Parsed points are truncated to
/// the minute, stably sorted, and de-duplicated keeping the last row for
/// each minute. Resampling places every signal on the uniform axis
/// t_min, t_min + 1, ..., t_max: observed minutes keep their value, gaps
/// carry the previous observation forward, and minutes before the first
/// observation take the first observation (backward fill).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stiction/error.hpp"
#include "stiction/timestamp.hpp"

namespace stiction {

enum class SignalKind { op, pv };

/// How a resampled value was obtained.
enum class FillFlag : std::uint8_t { observed = 0, forward_filled = 1, backward_filled = 2 };

struct RawPoint {
  Minute time;
  double value = 0.0;
};

/// A rejected input row. `line` is 1-based and counts the header.
struct ParseDiagnostic {
  std::size_t line = 0;
  ErrorKind kind = ErrorKind::FormatError;
  std::string message;
};

/// Parsed signal with strictly increasing minute timestamps.
struct RawSeries {
  SignalKind kind = SignalKind::op;
  std::string unit;
  std::vector<RawPoint> points;
  std::vector<ParseDiagnostic> diagnostics;

  Minute first_time() const { return points.front().time; }
  Minute last_time() const { return points.back().time; }
};

/// Parses a `timestamp,value` table.
///
/// Row problems are recorded in `diagnostics` and the row is skipped.
/// Throws Error(UnparseableTimestamp) when rows exist but every timestamp
/// fails, and Error(EmptyInput) when no row yields a point.
RawSeries parse_raw(std::istream& in, SignalKind kind, std::string unit = {});

/// Values of one signal on a uniform minute axis plus per-sample fill flags.
struct FilledSignal {
  std::vector<double> values;
  std::vector<FillFlag> mask;
};

/// Resamples onto the series' own span [first_time, last_time].
FilledSignal resample_fill(const RawSeries& raw);

/// Resamples onto [axis_start, axis_end]. The axis must cover the raw span.
FilledSignal resample_fill(const RawSeries& raw, Minute axis_start, Minute axis_end);

/// Aligned OP/PV record on a 1-minute axis starting at t0.
struct UniformSeries {
  Minute t0;
  std::vector<double> op;
  std::vector<double> pv;
  std::vector<FillFlag> op_fill;
  std::vector<FillFlag> pv_fill;

  std::size_t size() const { return op.size(); }
  Minute time_at(std::size_t i) const { return t0 + static_cast<std::int64_t>(i); }

  /// Throws Error(LengthMismatch) or Error(FormatError) if an invariant fails.
  void validate() const;

  /// All-observed series built from aligned arrays.
  static UniformSeries dense(Minute t0, std::vector<double> op, std::vector<double> pv);
};

/// Merges both signals onto the union of their time ranges.
UniformSeries merge_op_pv(const RawSeries& op, const RawSeries& pv);

/// Canonical table: `timestamp,op,pv,op_fill,pv_fill` with ISO timestamps,
/// shortest round-trip decimal values and fill flags as `obs|ffill|bfill`.
void write_unified(std::ostream& out, const UniformSeries& series);

/// Reads the canonical table back; values round-trip bit-exactly.
UniformSeries read_unified(std::istream& in);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

std::string_view to_string(FillFlag f);

}  // namespace stiction
