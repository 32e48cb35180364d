#include "stiction/config.hpp"

#include <charconv>
#include <cmath>
#include <istream>

#include "stiction/error.hpp"

namespace stiction {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::optional<std::string> ConfigSection::get(const std::string& key) const {
  for (auto it = entries.rbegin(); it != entries.rend(); ++it)
    if (it->first == key) return it->second;
  return std::nullopt;
}

double ConfigSection::get_double(const std::string& key, double fallback) const {
  const auto raw = get(key);
  if (!raw) return fallback;
  const auto v = parse_double(*raw);
  if (!v) fail(ErrorKind::FormatError, "[" + name + "] " + key + ": not a number: " + *raw);
  return *v;
}

std::int64_t ConfigSection::get_int(const std::string& key, std::int64_t fallback) const {
  const auto raw = get(key);
  if (!raw) return fallback;
  const auto v = parse_int(*raw);
  if (!v) fail(ErrorKind::FormatError, "[" + name + "] " + key + ": not an integer: " + *raw);
  return *v;
}

std::uint64_t ConfigSection::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto raw = get(key);
  if (!raw) return fallback;
  std::string_view t = trim(*raw);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size())
    fail(ErrorKind::FormatError, "[" + name + "] " + key + ": not an unsigned integer: " + *raw);
  return v;
}

const ConfigSection* ConfigDocument::first(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

std::vector<const ConfigSection*> ConfigDocument::all(const std::string& name) const {
  std::vector<const ConfigSection*> out;
  for (const auto& s : sections)
    if (s.name == name) out.push_back(&s);
  return out;
}

ConfigDocument parse_config(std::istream& in) {
  ConfigDocument doc;
  doc.sections.push_back({"", 0, {}});
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#' || s.front() == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        fail(ErrorKind::FormatError, "line " + std::to_string(lineno) + ": unterminated section header");
      doc.sections.push_back({std::string(trim(s.substr(1, s.size() - 2))), lineno, {}});
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::FormatError, "line " + std::to_string(lineno) + ": expected key = value");
    std::string_view key = trim(s.substr(0, eq));
    std::string_view value = s.substr(eq + 1);
    // Inline comments need a preceding blank so values may contain '#'.
    for (const char* marker : {" #", " ;", "\t#", "\t;"}) {
      const auto pos = value.find(marker);
      if (pos != std::string_view::npos) value = value.substr(0, pos);
    }
    if (key.empty())
      fail(ErrorKind::FormatError, "line " + std::to_string(lineno) + ": empty key");
    doc.sections.back().entries.emplace_back(std::string(key), std::string(trim(value)));
  }
  return doc;
}

}  // namespace stiction
