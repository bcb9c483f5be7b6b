#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "subtext/errors.hpp"
#include "subtext/subtitle_index.hpp"

namespace subtext::vtt {

// Times are kept as integral milliseconds so parsing, arithmetic and
// serialization stay exact; seconds views are derived.
struct Cue {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::string text;

  double start_s() const { return static_cast<double>(start_ms) / 1000.0; }
  double end_s() const { return static_cast<double>(end_ms) / 1000.0; }

  bool operator==(const Cue&) const = default;
};

struct CueTrack {
  std::vector<Cue> cues;
  std::string language;
  SourceKind source = SourceKind::Unknown;
  std::vector<std::string> warnings;
};

// `HH:MM:SS.mmm` (two-or-more hour digits) or `MM:SS.mmm`; minutes and
// seconds are two digits in 00-59, fraction exactly three digits.
std::optional<std::int64_t> try_parse_timestamp_ms(std::string_view text);
std::int64_t parse_timestamp_ms(std::string_view text);  // throws BadTimestamp

// Decodes one WebVTT file. Tolerates a UTF-8 BOM and CRLF/CR line ends;
// invalid UTF-8 is replaced with U+FFFD and recorded as a warning.
// NOTE/STYLE/REGION blocks and cue settings are skipped, cue identifiers
// accepted, payload lines joined with a single space. Malformed cue
// blocks are skipped with a warning. Throws NotVtt when the header line
// is absent; any other input yields a CueTrack.
CueTrack parse_vtt(std::string_view bytes, std::string language,
                   SourceKind source);

// Cleans a parsed track, in order:
//   1. strip <...> markup spans, keeping inner text,
//   2. collapse internal whitespace, trim,
//   3. drop cues left empty,
//   4. drop cues with end < start (warning recorded),
//   5. stable-sort by start time,
//   6. rolling-caption dedup: drop a cue equal to the previous kept text.
// Idempotent; output has no empty texts, no adjacent equal texts, and
// non-decreasing start times.
CueTrack normalize_track(CueTrack track);

// Normalized cue texts joined with single spaces; "" for an empty track.
std::string track_text(const CueTrack& track);

// "<seconds>.<mmm>", e.g. 1500 -> "1.500". Used by the cue table and
// duration columns.
std::string format_seconds(std::int64_t ms);

}  // namespace subtext::vtt
