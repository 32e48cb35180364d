#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stiction {

// Plain-text `key = value` configuration with `[section]` headers.
// Lines starting with '#' or ';' are comments. Sections may repeat
// (each `[episode]` block is one entry). Keys before any header belong
// to a section with an empty name.
struct ConfigSection {
  std::string name;
  std::size_t line = 0;
  std::vector<std::pair<std::string, std::string>> entries;

  std::optional<std::string> get(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
};

struct ConfigDocument {
  std::vector<ConfigSection> sections;

  const ConfigSection* first(const std::string& name) const;
  std::vector<const ConfigSection*> all(const std::string& name) const;
};

// Throws Error(FormatError) on malformed lines.
ConfigDocument parse_config(std::istream& in);

// Strict numeric parsing shared with the CSV readers; whole string must match.
std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);

}  // namespace stiction
