#pragma once

// Download and cache of published datasets over HTTP(S).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace lt {

struct RemoteDataset {
  std::string name;
  std::string url;
  /// Expected size in bytes; 0 when unknown (the server's length is used).
  std::uint64_t size = 0;
  /// Expected lower-case hex SHA-256; empty when unknown.
  std::string sha256;
};

class Registry {
 public:
  /// Built-in entries. LTBENCH_FETCH_BASE_URL replaces their common base URL.
  static Registry builtin();
  /// {"datasets": [{"name", "url", "size"?, "sha256"?}, ...]}
  static Registry from_json(const nlohmann::json& j);
  /// LTBENCH_REGISTRY (a JSON file) if set, otherwise builtin().
  static Registry load_default();

  void add(RemoteDataset d);
  /// Throws NotFound listing the known names.
  const RemoteDataset& find(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::vector<RemoteDataset> entries_;
};

struct FetchOptions {
  std::filesystem::path cache_dir;
  /// Upper bound on concurrent range requests.
  int max_connections = 4;
  /// Files below this size are fetched with a single request.
  std::uint64_t parallel_threshold = 4u << 20;
  long connect_timeout_s = 30;
};

/// LTBENCH_CACHE_DIR, else $XDG_CACHE_HOME/ltbench, else ~/.cache/ltbench.
std::filesystem::path default_cache_dir();

struct FetchResult {
  std::filesystem::path path;
  bool downloaded = false;
  std::uint64_t bytes_transferred = 0;
};

/// Returns the cached file, downloading it first if needed. Partial downloads
/// resume. A cached file that no longer matches its recorded size or SHA-256
/// is deleted and IntegrityError is raised, so the next call downloads it
/// again. Network failures raise NetworkError.
FetchResult fetch_remote(const std::string& name, const Registry& registry, const FetchOptions& opts);

}  // namespace lt
