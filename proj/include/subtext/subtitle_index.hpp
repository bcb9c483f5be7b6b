#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace subtext {

// Provenance of a subtitle track. Platform payloads tag finer sources
// than the binary platform-vs-local split; Unknown is a valid fallback,
// never an error.
enum class SourceKind {
  AutomaticSpeech,
  MachineTranslation,
  CreatorCaption,
  Unknown,
};

std::string_view to_string(SourceKind kind);

// Case-insensitive, whitespace-trimmed table lookup. Total over strings.
SourceKind classify_source(std::string_view tag);

// One subtitle track advertised by a post payload.
struct SubtitleDescriptor {
  std::string language;  // BCP-47-style tag, lowercased ("eng-us")
  std::string format;    // lowercased tag, "webvtt" expected
  SourceKind source = SourceKind::Unknown;
  std::string url;       // absolute
  std::string url_key;   // stable version key, may be empty
  std::optional<std::int64_t> size_bytes;

  bool operator==(const SubtitleDescriptor&) const = default;
};

struct DescriptorScan {
  std::vector<SubtitleDescriptor> descriptors;  // payload order
  int skipped = 0;  // entries missing url/language or with a relative url
};

// Reads `video.subtitleInfos` out of one item payload. Absence of the
// path is an empty scan, not an error.
DescriptorScan extract_descriptors(const nlohmann::json& item);

// Deterministic pick of the single track to fetch.
//
// Ranking, lexicographic:
//   1. earliest matching preference (prefix match; "en" covers "eng-us"
//      and "en"); non-matching descriptors rank after all matches; with
//      empty prefs everything ties at rank 0,
//   2. source: CreatorCaption, then AutomaticSpeech, then
//      MachineTranslation, then Unknown,
//   3. smallest (language, url_key, url).
//
// Returns a pointer into `descriptors`, or nullptr iff it is empty.
const SubtitleDescriptor* select_track(
    const std::vector<SubtitleDescriptor>& descriptors,
    const std::vector<std::string>& prefs);

}  // namespace subtext
