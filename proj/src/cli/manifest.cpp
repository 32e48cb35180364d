#include "manifest.hpp"

#include <ctime>
#include <fstream>

#include "stiction/error.hpp"

namespace stiction::cli {

std::uint64_t fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoFailure, "cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest::RunManifest(std::string command, std::vector<std::string> argv) {
  doc_["command"] = std::move(command);
  doc_["argv"] = std::move(argv);
  doc_["arguments"] = nlohmann::json::object();
  doc_["seed"] = nullptr;
  doc_["tool_version"] = STICTION_VERSION;
  doc_["started_utc"] = utc_now();
}

void RunManifest::argument(const std::string& key, nlohmann::json value) { doc_["arguments"][key] = std::move(value); }

void RunManifest::config_snapshot(std::string text) { doc_["config"] = std::move(text); }

void RunManifest::seed(std::uint64_t s) { doc_["seed"] = s; }

void RunManifest::input(const fs::path& path) {
  inputs_.push_back({{"path", path.string()},
                     {"bytes", fs::file_size(path)},
                     {"fnv1a64", hex64(fnv1a_file(path))}});
}

void RunManifest::output(const fs::path& path) {
  outputs_.push_back({{"path", path.string()},
                      {"bytes", fs::file_size(path)},
                      {"fnv1a64", hex64(fnv1a_file(path))}});
}

void RunManifest::note(const std::string& key, nlohmann::json value) { doc_[key] = std::move(value); }

nlohmann::json RunManifest::finish() const {
  nlohmann::json doc = doc_;
  doc["inputs"] = inputs_;
  doc["outputs"] = outputs_;
  doc["finished_utc"] = utc_now();
  return doc;
}

OutputSet::~OutputSet() {
  if (committed_) return;
  std::error_code ec;
  for (auto it = files_.rbegin(); it != files_.rend(); ++it) fs::remove(*it, ec);
  for (auto it = dirs_.rbegin(); it != dirs_.rend(); ++it) fs::remove(*it, ec);  // only if empty
}

void OutputSet::ensure_directory(const fs::path& dir) {
  if (fs::is_directory(dir)) return;
  std::error_code ec;
  fs::path missing = dir;
  std::vector<fs::path> created;
  while (!missing.empty() && !fs::exists(missing)) {
    created.push_back(missing);
    missing = missing.parent_path();
  }
  if (!fs::create_directories(dir, ec) && ec) fail(ErrorKind::IoFailure, "cannot create directory " + dir.string());
  dirs_.insert(dirs_.end(), created.rbegin(), created.rend());
}

void OutputSet::write(const fs::path& path, const std::function<void(std::ostream&)>& body, bool binary) {
  if (path.has_parent_path()) ensure_directory(path.parent_path());
  files_.push_back(path);
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) fail(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) fail(ErrorKind::IoFailure, "write failed: " + path.string());
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p += suffix;
  return p;
}

fs::path manifest_path_for(const fs::path& out) { return sibling(out, ".manifest.json"); }

}  // namespace stiction::cli
