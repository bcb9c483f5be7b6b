#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "subtext/fetcher.hpp"
#include "subtext/subtitle_index.hpp"
#include "test_util.hpp"

// Synthetic capture + cache fixtures shared by the pipeline tests and
// the acceptance suite.
namespace fixtures {

struct FixturePost {
  std::string id;
  std::string query;
  std::string description;
  bool with_descriptor = true;
  int cue_count = 5;         // 0 = silent track
  bool cache_track = true;   // write the VTT into the cache
  bool malformed_vtt = false;
  std::string language = "eng-US";
  std::string source = "ASR";
  std::string url;  // defaults to a per-post cdn-style url
};

inline std::string vtt_body(const FixturePost& post) {
  if (post.malformed_vtt) return "this is not a vtt file at all\n";
  std::ostringstream out;
  out << "WEBVTT\n";
  for (int i = 0; i < post.cue_count; ++i) {
    out << "\n"
        << testutil::format_timestamp(i * 2000) << " --> "
        << testutil::format_timestamp(i * 2000 + 1500) << "\n"
        << "cue" << i << " words from post " << post.id << "\n";
  }
  return out.str();
}

inline std::string descriptor_url(const FixturePost& post) {
  if (!post.url.empty()) return post.url;
  return "https://cdn.example/subs/" + post.id + ".vtt?sig=deadbeef";
}

inline nlohmann::json capture_item(const FixturePost& post) {
  auto item = testutil::make_item(
      post.id,
      post.description.empty() ? "post #" + post.query : post.description);
  if (post.with_descriptor) {
    testutil::add_subtitle(item, post.language, descriptor_url(post),
                           post.source, "webvtt", "1");
  }
  return item;
}

inline subtext::SubtitleDescriptor descriptor_for(const FixturePost& post) {
  subtext::SubtitleDescriptor d;
  std::string language = post.language;
  for (char& c : language)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  d.language = language;
  d.format = "webvtt";
  d.source = subtext::classify_source(post.source);
  d.url = descriptor_url(post);
  d.url_key = "1";
  return d;
}

inline void write_capture(const std::filesystem::path& path,
                          const std::vector<FixturePost>& posts) {
  std::ostringstream out;
  for (const auto& post : posts) out << capture_item(post).dump() << "\n";
  testutil::write_file(path, out.str());
}

inline void warm_cache(const std::filesystem::path& cache_dir,
                       const std::vector<FixturePost>& posts) {
  for (const auto& post : posts) {
    if (!post.with_descriptor || !post.cache_track) continue;
    auto key = subtext::cache_key(descriptor_for(post), post.id);
    testutil::write_file(cache_dir / (key + ".vtt"), vtt_body(post));
    testutil::write_file(
        cache_dir / (key + ".meta.json"),
        "{\n  \"url\": \"" + descriptor_url(post) +
            "\",\n  \"fetched_at\": 1699999000,\n  \"http_status\": 200,\n"
            "  \"content_length\": 1\n}\n");
  }
}

// rel-path -> bytes snapshot for whole-tree comparisons.
inline std::map<std::string, std::string> snapshot_tree(
    const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  if (!std::filesystem::exists(root)) return out;
  for (const auto& entry :
       std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    out.emplace(std::filesystem::relative(entry.path(), root).string(),
                testutil::read_file(entry.path()));
  }
  return out;
}

}  // namespace fixtures
