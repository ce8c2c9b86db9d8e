#include "ltbench/fetch.hpp"

#include <curl/curl.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include "ltbench/checksum.hpp"
#include "ltbench/errors.hpp"

namespace fs = std::filesystem;

namespace lt {

namespace {

constexpr const char* kDefaultBase = "https://causalchamber.s3.eu-central-1.amazonaws.com/downloadables";

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

void curl_global() {
  static std::once_flag once;
  std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

struct CurlDeleter {
  void operator()(CURL* c) const { curl_easy_cleanup(c); }
};
using Curl = std::unique_ptr<CURL, CurlDeleter>;

Curl make_handle(const std::string& url, const FetchOptions& opts) {
  curl_global();
  Curl c(curl_easy_init());
  if (!c) throw NetworkError("curl initialization failed");
  curl_easy_setopt(c.get(), CURLOPT_URL, url.c_str());
  curl_easy_setopt(c.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(c.get(), CURLOPT_CONNECTTIMEOUT, opts.connect_timeout_s);
  curl_easy_setopt(c.get(), CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(c.get(), CURLOPT_FAILONERROR, 1L);
#if LIBCURL_VERSION_NUM >= 0x075500
  curl_easy_setopt(c.get(), CURLOPT_PROTOCOLS_STR, "http,https");
  curl_easy_setopt(c.get(), CURLOPT_REDIR_PROTOCOLS_STR, "http,https");
#endif
  return c;
}

struct Probe {
  std::uint64_t size = 0;
  bool ranges = false;
};

std::size_t header_cb(char* data, std::size_t size, std::size_t n, void* user) {
  const std::string line(data, size * n);
  auto* p = static_cast<Probe*>(user);
  std::string lower = line;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower.starts_with("accept-ranges:") && lower.find("bytes") != std::string::npos) p->ranges = true;
  return size * n;
}

Probe probe(const std::string& url, const FetchOptions& opts) {
  auto c = make_handle(url, opts);
  Probe p;
  curl_easy_setopt(c.get(), CURLOPT_NOBODY, 1L);
  curl_easy_setopt(c.get(), CURLOPT_HEADERFUNCTION, header_cb);
  curl_easy_setopt(c.get(), CURLOPT_HEADERDATA, &p);
  const auto rc = curl_easy_perform(c.get());
  if (rc != CURLE_OK) throw NetworkError(url + ": " + curl_easy_strerror(rc));
  curl_off_t len = -1;
  curl_easy_getinfo(c.get(), CURLINFO_CONTENT_LENGTH_DOWNLOAD_T, &len);
  p.size = len > 0 ? static_cast<std::uint64_t>(len) : 0;
  return p;
}

struct Sink {
  std::ofstream* out;
  std::uint64_t written = 0;
};

std::size_t write_cb(char* data, std::size_t size, std::size_t n, void* user) {
  auto* s = static_cast<Sink*>(user);
  s->out->write(data, static_cast<std::streamsize>(size * n));
  if (!*s->out) return 0;
  s->written += size * n;
  return size * n;
}

/// Downloads bytes [lo, hi] (hi < 0: to the end) into `part`, resuming from
/// whatever `part` already holds. Returns bytes transferred.
std::uint64_t download_range(const std::string& url, const fs::path& part, std::uint64_t lo, std::int64_t hi,
                             const FetchOptions& opts) {
  const std::uint64_t have = fs::exists(part) ? fs::file_size(part) : 0;
  if (hi >= 0 && lo + have > static_cast<std::uint64_t>(hi)) return 0;
  std::ofstream out(part, std::ios::binary | std::ios::app);
  if (!out) throw NetworkError("cannot write " + part.string());
  auto c = make_handle(url, opts);
  Sink sink{&out};
  curl_easy_setopt(c.get(), CURLOPT_WRITEFUNCTION, write_cb);
  curl_easy_setopt(c.get(), CURLOPT_WRITEDATA, &sink);
  const auto start = lo + have;
  std::string range;
  if (start > 0 || hi >= 0) {
    range = std::to_string(start) + "-" + (hi >= 0 ? std::to_string(hi) : std::string());
    curl_easy_setopt(c.get(), CURLOPT_RANGE, range.c_str());
  }
  const auto rc = curl_easy_perform(c.get());
  out.close();
  if (rc != CURLE_OK) throw NetworkError(url + ": " + curl_easy_strerror(rc));
  long status = 0;
  curl_easy_getinfo(c.get(), CURLINFO_RESPONSE_CODE, &status);
  if (!range.empty() && status == 200) {
    // The server ignored the range and sent the whole file.
    fs::remove(part);
    throw NetworkError(url + ": server does not honor range requests");
  }
  return sink.written;
}

nlohmann::json read_meta(const fs::path& p) {
  std::ifstream in(p);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception&) {
    return nullptr;
  }
}

void discard(const fs::path& file, const fs::path& meta) {
  std::error_code ec;
  fs::remove(file, ec);
  fs::remove(meta, ec);
}

std::string url_basename(const std::string& url) {
  auto end = url.find_first_of("?#");
  auto path = url.substr(0, end);
  auto slash = path.find_last_of('/');
  auto base = slash == std::string::npos ? path : path.substr(slash + 1);
  return base.empty() ? "download" : base;
}

}  // namespace

Registry Registry::builtin() {
  const auto base = env_or("LTBENCH_FETCH_BASE_URL", kDefaultBase);
  Registry r;
  for (const char* name : {"lt_crl_benchmark_v1", "lt_camera_v1", "lt_camera_walks_v1"}) {
    r.add({name, base + "/" + name + ".zip", 0, ""});
  }
  return r;
}

Registry Registry::from_json(const nlohmann::json& j) {
  try {
    Registry r;
    for (const auto& e : j.at("datasets")) {
      r.add({e.at("name").get<std::string>(), e.at("url").get<std::string>(), e.value("size", std::uint64_t{0}),
             e.value("sha256", std::string())});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed registry: ") + e.what());
  }
}

Registry Registry::load_default() {
  const char* path = std::getenv("LTBENCH_REGISTRY");
  if (!path || !*path) return builtin();
  std::ifstream in(path);
  if (!in) throw NotFound(std::string("registry file ") + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed registry: ") + e.what());
  }
}

void Registry::add(RemoteDataset d) {
  for (auto& e : entries_) {
    if (e.name == d.name) {
      e = std::move(d);
      return;
    }
  }
  entries_.push_back(std::move(d));
}

const RemoteDataset& Registry::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return e;
  std::string known;
  for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
  throw NotFound("unknown dataset '" + name + "'; known datasets: " + known);
}

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

fs::path default_cache_dir() {
  if (const char* v = std::getenv("LTBENCH_CACHE_DIR"); v && *v) return v;
  if (const char* v = std::getenv("XDG_CACHE_HOME"); v && *v) return fs::path(v) / "ltbench";
  if (const char* v = std::getenv("HOME"); v && *v) return fs::path(v) / ".cache" / "ltbench";
  return fs::temp_directory_path() / "ltbench-cache";
}

FetchResult fetch_remote(const std::string& name, const Registry& registry, const FetchOptions& opts) {
  const auto& entry = registry.find(name);
  const fs::path dir = (opts.cache_dir.empty() ? default_cache_dir() : opts.cache_dir) / name;
  fs::create_directories(dir);
  const fs::path file = dir / url_basename(entry.url);
  const fs::path meta = fs::path(file.string() + ".meta");

  if (fs::exists(file)) {
    const auto m = read_meta(meta);
    const auto size = fs::file_size(file);
    const bool ok = m.is_object() && m.value("size", std::uint64_t{0}) == size &&
                    (entry.size == 0 || entry.size == size) &&
                    (entry.sha256.empty() || entry.sha256 == m.value("sha256", std::string())) &&
                    sha256_file(file) == m.value("sha256", std::string());
    if (ok) return {file, false, 0};
    discard(file, meta);
    throw IntegrityError("cached " + file.string() + " does not match its recorded size or checksum; removed");
  }

  const auto info = probe(entry.url, opts);
  const std::uint64_t size = entry.size ? entry.size : info.size;
  if (entry.size && info.size && info.size != entry.size) {
    throw IntegrityError(name + ": server reports " + std::to_string(info.size) + " bytes, expected " +
                         std::to_string(entry.size));
  }
  const int chunks =
      (info.ranges && size >= opts.parallel_threshold) ? std::clamp(opts.max_connections, 1, 4) : 1;
  std::uint64_t transferred = 0;
  std::vector<fs::path> parts;
  if (chunks == 1) {
    parts.push_back(fs::path(file.string() + ".part"));
    if (!info.ranges) fs::remove(parts[0]);  // cannot resume without ranges
    transferred = download_range(entry.url, parts[0], 0, size && info.ranges ? static_cast<std::int64_t>(size) - 1 : -1, opts);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::uint64_t> got(static_cast<std::size_t>(chunks), 0);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chunks));
    const std::uint64_t step = (size + static_cast<std::uint64_t>(chunks) - 1) / static_cast<std::uint64_t>(chunks);
    for (int k = 0; k < chunks; ++k) {
      const auto lo = step * static_cast<std::uint64_t>(k);
      const auto hi = std::min(size, lo + step) - 1;
      parts.push_back(fs::path(file.string() + ".part" + std::to_string(k)));
      workers.emplace_back([&, k, lo, hi] {
        try {
          got[static_cast<std::size_t>(k)] =
              download_range(entry.url, parts[static_cast<std::size_t>(k)], lo, static_cast<std::int64_t>(hi), opts);
        } catch (...) {
          errors[static_cast<std::size_t>(k)] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    for (auto g : got) transferred += g;
  }

  {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    for (const auto& p : parts) {
      if (fs::file_size(p) == 0) continue;
      std::ifstream in(p, std::ios::binary);
      out << in.rdbuf();
    }
    if (!out) throw NetworkError("cannot assemble " + file.string());
  }
  const auto actual = fs::file_size(file);
  const auto sum = sha256_file(file);
  if ((size && actual != size) || (!entry.sha256.empty() && sum != entry.sha256)) {
    discard(file, meta);
    for (const auto& p : parts) fs::remove(p);
    throw IntegrityError(name + ": downloaded " + std::to_string(actual) + " bytes that fail verification");
  }
  for (const auto& p : parts) fs::remove(p);
  std::ofstream(meta) << nlohmann::json{{"url", entry.url}, {"size", actual}, {"sha256", sum}}.dump(2) << '\n';
  return {file, true, transferred};
}

}  // namespace lt
