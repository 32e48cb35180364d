#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace stiction {

// A naive calendar instant at minute resolution, counted from
// 1970-01-01T00:00. No time zone is attached.
struct Minute {
  std::int64_t value = 0;

  friend auto operator<=>(const Minute&, const Minute&) = default;
  Minute operator+(std::int64_t minutes) const { return {value + minutes}; }
  std::int64_t operator-(Minute other) const { return value - other.value; }
};

// Accepted forms (seconds and fractional seconds are truncated):
//   YYYY-MM-DD[(T| )HH:MM[:SS[.fff]]][Z]
//   DD/MM/YYYY[ HH:MM[:SS]]
// Slash dates are always read day first.
std::optional<Minute> parse_timestamp(std::string_view text);

// Formats as YYYY-MM-DDTHH:MM.
std::string format_timestamp(Minute t);

Minute make_minute(int year, unsigned month, unsigned day, unsigned hour = 0,
                   unsigned minute = 0);

}  // namespace stiction
