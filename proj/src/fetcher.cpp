#include "subtext/fetcher.hpp"

#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace subtext {

namespace {

std::string sha256_hex16(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(16);
  for (unsigned i = 0; i < 8 && i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sanitize_component(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char raw : s) {
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    bool safe = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
                c == '-';
    out.push_back(safe ? c : '-');
  }
  return out;
}

std::string_view strip_query(std::string_view url) {
  return url.substr(0, url.find('?'));
}

// "scheme://host[:port]/path?query" -> (scheme://host:port, /path?query)
bool split_url(const std::string& url, std::string& base,
               std::string& target) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return false;
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    base = url;
    target = "/";
  } else {
    base = url.substr(0, path_start);
    target = url.substr(path_start);
  }
  return true;
}

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status <= 599);
}

std::optional<std::int64_t> meta_fetched_at(
    const std::filesystem::path& meta_path) {
  std::ifstream in(meta_path, std::ios::binary);
  if (!in) return std::nullopt;
  auto meta = nlohmann::json::parse(in, nullptr, false);
  if (meta.is_discarded() || !meta.is_object()) return std::nullopt;
  auto it = meta.find("fetched_at");
  if (it == meta.end() || !it->is_number_integer()) return std::nullopt;
  return it->get<std::int64_t>();
}

}  // namespace

std::int64_t system_clock_now() {
  return static_cast<std::int64_t>(std::time(nullptr));
}

void FetchConfig::validate() const {
  if (max_concurrent < 1) throw ConfigError("max_concurrent must be >= 1");
  if (!(requests_per_second > 0))
    throw ConfigError("requests_per_second must be > 0");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (backoff_base_ms < 1) throw ConfigError("backoff_base_ms must be >= 1");
  if (timeout_ms < 1) throw ConfigError("timeout_ms must be >= 1");
  if (offline && refetch)
    throw ConfigError("--refetch needs network access; drop --offline");
}

std::filesystem::path FetchConfig::effective_cache_dir() const {
  if (!cache_dir.empty()) return cache_dir;
  if (const char* env = std::getenv("SUBTEXT_CACHE_DIR");
      env != nullptr && *env != '\0')
    return env;
  return "subtext_cache";
}

std::string_view to_string(FetchErrorKind kind) {
  switch (kind) {
    case FetchErrorKind::OfflineMiss: return "offline_miss";
    case FetchErrorKind::Expired: return "expired";
    case FetchErrorKind::NetworkExhausted: return "network_exhausted";
    case FetchErrorKind::EmptyBody: return "empty_body";
  }
  return "network_exhausted";
}

std::string cache_key(const SubtitleDescriptor& descriptor,
                      const std::string& post_id) {
  std::string_view hashed = descriptor.url_key.empty()
                                ? strip_query(descriptor.url)
                                : std::string_view(descriptor.url_key);
  return sanitize_component(post_id) + "_" +
         sanitize_component(descriptor.language) + "_" + sha256_hex16(hashed);
}

RateLimiter::RateLimiter(double per_second)
    : interval_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(1.0 / per_second))),
      next_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

void atomic_write_file(const std::filesystem::path& path,
                       std::string_view data) {
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PathUnwritable(tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw PathUnwritable(tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw PathUnwritable(path.string());
  }
}

Fetcher::Fetcher(FetchConfig config, Clock clock)
    : config_(std::move(config)),
      clock_(std::move(clock)),
      limiter_(config_.requests_per_second) {
  config_.validate();
  cache_dir_ = config_.effective_cache_dir();
  std::error_code ec;
  std::filesystem::create_directories(cache_dir_, ec);
  if (ec) throw PathUnwritable(cache_dir_.string());
}

FetchResult Fetcher::fetch(const SubtitleDescriptor& descriptor,
                           const std::string& post_id) {
  std::string key = cache_key(descriptor, post_id);
  auto body_path = cache_dir_ / (key + ".vtt");
  auto meta_path = cache_dir_ / (key + ".meta.json");

  if (!config_.refetch) {
    std::error_code ec;
    auto size = std::filesystem::file_size(body_path, ec);
    if (!ec && size > 0) {
      std::ifstream in(body_path, std::ios::binary);
      if (in) {
        std::ostringstream buf;
        buf << in.rdbuf();
        SubtitlePayload payload;
        payload.descriptor = descriptor;
        payload.bytes = std::move(buf).str();
        payload.fetched_at = meta_fetched_at(meta_path).value_or(0);
        payload.cache_hit = true;
        payload.attempts = 1;
        return payload;
      }
    }
  }

  if (config_.offline) {
    return FetchError{FetchErrorKind::OfflineMiss,
                      "offline run and no cache entry " + key, 0};
  }
  return fetch_over_network(descriptor, body_path, meta_path);
}

FetchResult Fetcher::fetch_over_network(
    const SubtitleDescriptor& descriptor,
    const std::filesystem::path& body_path,
    const std::filesystem::path& meta_path) {
  std::string base, target;
  if (!split_url(descriptor.url, base, target)) {
    return FetchError{FetchErrorKind::NetworkExhausted,
                      "unsupported URL: " + descriptor.url, 0};
  }

  std::string last_failure;
  int attempt = 0;
  while (true) {
    ++attempt;
    limiter_.acquire();

    httplib::Client client(base);
    client.set_follow_location(true);
    auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto res = client.Get(target);
    if (res) {
      if (res->status == 200) {
        if (res->body.empty()) {
          return FetchError{FetchErrorKind::EmptyBody,
                            "200 with zero bytes from " + descriptor.url,
                            attempt};
        }
        SubtitlePayload payload;
        payload.descriptor = descriptor;
        payload.bytes = res->body;
        payload.fetched_at = clock_();
        payload.cache_hit = false;
        payload.attempts = attempt;

        atomic_write_file(body_path, payload.bytes);
        nlohmann::ordered_json meta{
            {"url", descriptor.url},
            {"fetched_at", payload.fetched_at},
            {"http_status", res->status},
            {"content_length",
             static_cast<std::int64_t>(payload.bytes.size())},
        };
        atomic_write_file(meta_path, meta.dump(2) + "\n");
        return payload;
      }
      if (res->status == 403 || res->status == 404) {
        return FetchError{FetchErrorKind::Expired,
                          "HTTP " + std::to_string(res->status) +
                              " — signed subtitle URL expired",
                          attempt};
      }
      if (!retryable_status(res->status)) {
        return FetchError{FetchErrorKind::NetworkExhausted,
                          "HTTP " + std::to_string(res->status) +
                              " (not retryable) from " + descriptor.url,
                          attempt};
      }
      last_failure = "HTTP " + std::to_string(res->status);
    } else {
      last_failure = httplib::to_string(res.error());
    }

    if (attempt > config_.max_retries) {
      return FetchError{FetchErrorKind::NetworkExhausted,
                        "retries exceeded (" + last_failure + ") for " +
                            descriptor.url,
                        attempt};
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(
        config_.backoff_base_ms * (1LL << (attempt - 1))));
  }
}

std::vector<FetchResult> Fetcher::fetch_all(
    const std::vector<FetchJob>& jobs) {
  std::vector<FetchResult> results(jobs.size());
  if (jobs.empty()) return results;

  std::atomic<std::size_t> cursor{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    while (true) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        results[i] = fetch(jobs[i].descriptor, jobs[i].post_id);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::size_t pool = std::min<std::size_t>(
      static_cast<std::size_t>(config_.max_concurrent), jobs.size());
  std::vector<std::thread> threads;
  threads.reserve(pool);
  for (std::size_t i = 0; i < pool; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace subtext
