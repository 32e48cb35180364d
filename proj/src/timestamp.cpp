#include "stiction/timestamp.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>

namespace stiction {
namespace {

using namespace std::chrono;

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  // Reads exactly `min_digits`..`max_digits` decimal digits.
  std::optional<int> digits(int min_digits, int max_digits) {
    int value = 0;
    int count = 0;
    while (count < max_digits && !done() &&
           std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + (s_[pos_] - '0');
      ++pos_;
      ++count;
    }
    if (count < min_digits) return std::nullopt;
    return value;
  }
  void skip_fraction() {
    if (accept('.') || accept(',')) {
      while (!done() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

std::optional<Minute> assemble(int y, int mo, int d, int h, int mi, int sec) {
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
  if (h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 60)
    return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  const auto days_since = sys_days{ymd}.time_since_epoch().count();
  return Minute{static_cast<std::int64_t>(days_since) * 1440 + h * 60 + mi};
}

// Parses "HH:MM[:SS[.fff]]" into (h, m, s).
bool parse_clock(Cursor& c, int& h, int& mi, int& sec) {
  auto hh = c.digits(1, 2);
  if (!hh || !c.accept(':')) return false;
  auto mm = c.digits(2, 2);
  if (!mm) return false;
  h = *hh;
  mi = *mm;
  sec = 0;
  if (c.accept(':')) {
    auto ss = c.digits(2, 2);
    if (!ss) return false;
    sec = *ss;
    c.skip_fraction();
  }
  return true;
}

std::optional<Minute> parse_iso(std::string_view text) {
  Cursor c(text);
  auto y = c.digits(4, 4);
  if (!y || !c.accept('-')) return std::nullopt;
  auto mo = c.digits(1, 2);
  if (!mo || !c.accept('-')) return std::nullopt;
  auto d = c.digits(1, 2);
  if (!d) return std::nullopt;
  int h = 0, mi = 0, sec = 0;
  if (!c.done()) {
    if (!c.accept('T') && !c.accept(' ')) return std::nullopt;
    if (!parse_clock(c, h, mi, sec)) return std::nullopt;
    c.accept('Z');
  }
  if (!c.done()) return std::nullopt;
  return assemble(*y, *mo, *d, h, mi, sec);
}

std::optional<Minute> parse_day_first(std::string_view text) {
  Cursor c(text);
  auto d = c.digits(1, 2);
  if (!d || !c.accept('/')) return std::nullopt;
  auto mo = c.digits(1, 2);
  if (!mo || !c.accept('/')) return std::nullopt;
  auto y = c.digits(4, 4);
  if (!y) return std::nullopt;
  int h = 0, mi = 0, sec = 0;
  if (!c.done()) {
    if (!c.accept(' ') && !c.accept('T')) return std::nullopt;
    while (c.accept(' ')) {
    }
    if (!parse_clock(c, h, mi, sec)) return std::nullopt;
  }
  if (!c.done()) return std::nullopt;
  return assemble(*y, *mo, *d, h, mi, sec);
}

}  // namespace

std::optional<Minute> parse_timestamp(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"')
    text = text.substr(1, text.size() - 2);
  if (text.size() >= 5 && text[4] == '-') return parse_iso(text);
  return parse_day_first(text);
}

std::string format_timestamp(Minute t) {
  std::int64_t days = t.value / 1440;
  std::int64_t rem = t.value % 1440;
  if (rem < 0) {
    rem += 1440;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 60),
                static_cast<int>(rem % 60));
  return buf;
}

Minute make_minute(int y, unsigned mo, unsigned d, unsigned h, unsigned mi) {
  auto m = assemble(y, static_cast<int>(mo), static_cast<int>(d),
                    static_cast<int>(h), static_cast<int>(mi), 0);
  return m.value_or(Minute{});
}

}  // namespace stiction
