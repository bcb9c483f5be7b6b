#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "subtext/errors.hpp"
#include "subtext/subtitle_index.hpp"
#include "subtext/transcript.hpp"

namespace subtext {

// Where a post came from; enough to find the original line again.
struct RawRef {
  std::string source_path;
  std::size_t line_number = 0;
};

struct RawCapture {
  std::size_t line_number = 0;  // 1-based
  nlohmann::json payload;       // always a JSON object
  std::string source_path;
};

enum class ItemErrorKind { MalformedJson, MissingId, UnrecognizedShape };

std::string_view to_string(ItemErrorKind kind);

// Per-item, non-fatal.
struct ItemError {
  std::size_t line_number = 0;
  ItemErrorKind kind = ItemErrorKind::MalformedJson;
  std::string message;
};

struct Metrics {
  std::int64_t plays = 0;
  std::int64_t likes = 0;
  std::int64_t comments = 0;
  std::int64_t shares = 0;

  bool operator==(const Metrics&) const = default;
};

struct MusicInfo {
  std::string music_id;
  std::string title;
  bool original = false;

  bool operator==(const MusicInfo&) const = default;
};

// One captured TikTok post, normalized.
struct PostRecord {
  std::string id;           // nonempty, decimal for integer ids
  std::string author;       // handle, may be empty
  std::string description;  // caption text
  std::vector<std::string> hashtags;  // lowercase, no '#', first-seen order
  std::int64_t created_at = 0;        // unix seconds, 0 if absent
  Metrics metrics;
  std::optional<MusicInfo> music;
  std::vector<SubtitleDescriptor> subtitle_descriptors;
  int descriptors_skipped = 0;
  std::string query;  // collection-time tag, assigned per input file
  RawRef raw;
};

// Streams a Zeeschuimer-style NDJSON capture one line at a time; peak
// memory stays proportional to the longest line. Blank lines are
// skipped silently; a UTF-8 BOM on the first line is tolerated.
class NdjsonReader {
 public:
  explicit NdjsonReader(const std::filesystem::path& path);  // FileUnreadable

  std::optional<std::variant<RawCapture, ItemError>> next();

  std::size_t lines_total() const { return lines_total_; }
  std::size_t lines_blank() const { return lines_blank_; }

 private:
  std::ifstream in_;
  std::string source_path_;
  std::size_t line_number_ = 0;
  std::size_t lines_total_ = 0;
  std::size_t lines_blank_ = 0;
};

// Pure mapping of one capture onto a PostRecord. The payload schema
// table lives in ingest.cpp; shifts in the capture format are a
// one-file change.
std::variant<PostRecord, ItemError> parse_post(const RawCapture& raw);

struct IngestResult {
  std::vector<PostRecord> posts;
  std::vector<ItemError> errors;
  std::size_t lines_total = 0;
  std::size_t lines_blank = 0;
  // Transcripts reconstructed from subtitle_* columns when re-reading a
  // previously enriched CSV; empty for NDJSON input.
  TranscriptMap transcripts;
};

IngestResult read_ndjson(const std::filesystem::path& path,
                         const std::string& query);

// 4CAT-style CSV: UTF-8 with a header row. Recognized columns: id,
// thread_id, author, body, timestamp, hashtags, plays, likes, comments,
// shares, music_title, query, plus the subtitle_* columns written by
// the exporter. Throws HeaderMissing when there is no id column.
IngestResult read_4cat_csv(const std::filesystem::path& path,
                           const std::string& query);

struct DedupResult {
  std::vector<PostRecord> posts;  // subsequence of the input
  std::size_t dropped = 0;
};

// First occurrence of each id wins; relative order preserved.
DedupResult dedup_posts(std::vector<PostRecord> posts);

// Shared by parse_post and the CSV reader: lowercases ASCII, strips
// leading '#', rejects whitespace; used for hashtag cells and tokens.
std::vector<std::string> extract_hashtags(
    const std::vector<std::string>& structured, const std::string& description);

}  // namespace subtext
