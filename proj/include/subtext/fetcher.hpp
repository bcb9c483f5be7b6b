#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "subtext/errors.hpp"
#include "subtext/subtitle_index.hpp"

namespace subtext {

using Clock = std::function<std::int64_t()>;  // unix seconds

std::int64_t system_clock_now();

struct FetchConfig {
  int max_concurrent = 4;
  double requests_per_second = 2.0;
  int max_retries = 3;
  int backoff_base_ms = 500;  // doubles per failed attempt
  int timeout_ms = 10000;
  std::filesystem::path cache_dir;
  bool offline = false;
  bool refetch = false;  // bypass cache reads, refresh entries

  void validate() const;  // throws ConfigError

  // cache_dir if set, else $SUBTEXT_CACHE_DIR, else "subtext_cache".
  std::filesystem::path effective_cache_dir() const;
};

struct SubtitlePayload {
  SubtitleDescriptor descriptor;
  std::string bytes;  // nonempty
  std::int64_t fetched_at = 0;
  bool cache_hit = false;
  int attempts = 1;
};

enum class FetchErrorKind {
  OfflineMiss,       // offline run, cache miss
  Expired,           // 403/404: signed subtitle URL no longer valid
  NetworkExhausted,  // transport errors / 5xx / 429 beyond max_retries
  EmptyBody,         // 200 with zero bytes
};

std::string_view to_string(FetchErrorKind kind);

struct FetchError {
  FetchErrorKind kind = FetchErrorKind::NetworkExhausted;
  std::string message;
  int attempts = 0;
};

using FetchResult = std::variant<SubtitlePayload, FetchError>;

inline bool fetch_ok(const FetchResult& r) {
  return std::holds_alternative<SubtitlePayload>(r);
}

// `{post_id}_{language}_{h16}` where h16 is the first 16 hex chars of
// SHA-256 over url_key when nonempty, else over the URL stripped of its
// query string. Filesystem-safe: [a-z0-9_-] only.
std::string cache_key(const SubtitleDescriptor& descriptor,
                      const std::string& post_id);

// Token bucket with capacity one: admissions are spaced at least
// 1/per_second apart across all threads.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second);
  void acquire();

 private:
  std::mutex mutex_;
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_;
};

struct FetchJob {
  SubtitleDescriptor descriptor;
  std::string post_id;
};

// Downloads subtitle files politely and reproducibly. The rate limiter
// and cache are shared across all workers of one Fetcher; fetch_all
// returns results in input order regardless of completion order.
//
// Cache layout: {cache_dir}/{cache_key}.vtt plus {cache_key}.meta.json
// holding {url, fetched_at, http_status, content_length}. Entries are
// written atomically (temp file + rename) and never expire; `refetch`
// bypasses them.
class Fetcher {
 public:
  explicit Fetcher(FetchConfig config, Clock clock = system_clock_now);

  FetchResult fetch(const SubtitleDescriptor& descriptor,
                    const std::string& post_id);
  std::vector<FetchResult> fetch_all(const std::vector<FetchJob>& jobs);

  const FetchConfig& config() const { return config_; }

 private:
  FetchResult fetch_over_network(const SubtitleDescriptor& descriptor,
                                 const std::filesystem::path& body_path,
                                 const std::filesystem::path& meta_path);

  FetchConfig config_;
  std::filesystem::path cache_dir_;
  Clock clock_;
  RateLimiter limiter_;
};

// Writes `data` to `path` via a sibling temp file and rename, so a
// crash never leaves a truncated file readable under the final name.
void atomic_write_file(const std::filesystem::path& path,
                       std::string_view data);

}  // namespace subtext
