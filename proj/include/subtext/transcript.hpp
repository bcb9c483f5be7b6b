#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "subtext/fetcher.hpp"
#include "subtext/subtitle_index.hpp"

namespace subtext {

enum class TranscriptStatus {
  Ok,                 // text derivation completed (text may be empty)
  NoDescriptor,       // post advertised no subtitle track
  FetchFailed,        // see fetch_error for the kind
  UnsupportedFormat,  // descriptor announced a non-WebVTT format
  ParseFailed,        // fetched bytes were not parseable WebVTT
};

// Normalized spoken text for one post plus provenance.
struct Transcript {
  std::string post_id;
  std::string language;
  SourceKind source = SourceKind::Unknown;
  std::string text;
  std::int64_t word_count = 0;  // whitespace tokens of text
  std::int64_t cue_count = 0;
  std::int64_t speech_duration_ms = 0;  // sum of cue spans, normalized
  TranscriptStatus status = TranscriptStatus::NoDescriptor;
  std::optional<FetchErrorKind> fetch_error;
  std::int64_t fetched_at = 0;
  bool cache_hit = false;

  double speech_duration_s() const {
    return static_cast<double>(speech_duration_ms) / 1000.0;
  }
  bool has_speech() const {
    return status == TranscriptStatus::Ok && !text.empty();
  }
};

using TranscriptMap = std::map<std::string, Transcript>;

// Wire form of the status, e.g. "ok", "fetch_failed:expired".
std::string status_string(const Transcript& t);
TranscriptStatus status_from_string(std::string_view s,
                                    std::optional<FetchErrorKind>* kind);

}  // namespace subtext
