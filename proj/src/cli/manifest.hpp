#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace stiction::cli {

namespace fs = std::filesystem;

std::uint64_t fnv1a_file(const fs::path& path);
std::string hex64(std::uint64_t v);
std::string utc_now();

// Record of one stage run, written as JSON next to its outputs.
class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> argv);

  void argument(const std::string& key, nlohmann::json value);
  void config_snapshot(std::string text);
  void seed(std::uint64_t s);
  void input(const fs::path& path);
  void output(const fs::path& path);
  void note(const std::string& key, nlohmann::json value);

  nlohmann::json finish() const;

 private:
  nlohmann::json doc_;
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
};

// Files written by a stage. Unless commit() is called, every registered
// file (and any directory this set created) is removed on destruction.
class OutputSet {
 public:
  OutputSet() = default;
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet();

  void ensure_directory(const fs::path& dir);
  void write(const fs::path& path, const std::function<void(std::ostream&)>& body, bool binary = false);
  void commit() { committed_ = true; }
  const std::vector<fs::path>& files() const { return files_; }

 private:
  std::vector<fs::path> files_;
  std::vector<fs::path> dirs_;
  bool committed_ = false;
};

// Path of the manifest for a file output: `<out>.manifest.json`.
fs::path manifest_path_for(const fs::path& out);
fs::path sibling(const fs::path& out, const std::string& suffix);

}  // namespace stiction::cli
