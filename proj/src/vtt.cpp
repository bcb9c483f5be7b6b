#include "subtext/vtt.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace subtext::vtt {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

std::optional<int> parse_two_digit(std::string_view s, int max) {
  if (s.size() != 2 || !all_digits(s)) return std::nullopt;
  int v = (s[0] - '0') * 10 + (s[1] - '0');
  if (v > max) return std::nullopt;
  return v;
}

// Replaces invalid UTF-8 sequences with U+FFFD. Returns true when any
// replacement happened.
bool sanitize_utf8(std::string_view in, std::string& out) {
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  out.clear();
  out.reserve(in.size());
  bool replaced = false;
  std::size_t i = 0;
  while (i < in.size()) {
    unsigned char b0 = static_cast<unsigned char>(in[i]);
    std::size_t len;
    unsigned cp_min;
    if (b0 < 0x80) {
      out.push_back(in[i++]);
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp_min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp_min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp_min = 0x10000;
    } else {
      out.append(kReplacement);
      replaced = true;
      ++i;
      continue;
    }
    if (i + len > in.size()) {
      out.append(kReplacement);
      replaced = true;
      ++i;
      continue;
    }
    unsigned cp = b0 & (0xFF >> (len + 1));
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char b = static_cast<unsigned char>(in[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok || cp < cp_min || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.append(kReplacement);
      replaced = true;
      ++i;  // resync at the next byte
      continue;
    }
    out.append(in.substr(i, len));
    i += len;
  }
  return replaced;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      lines.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return lines;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

bool starts_block_keyword(std::string_view line, std::string_view keyword) {
  if (!line.starts_with(keyword)) return false;
  std::string_view rest = line.substr(keyword.size());
  return rest.empty() || rest[0] == ' ' || rest[0] == '\t';
}

// Removes <...> spans, keeping inner text; an unterminated span is
// dropped through end of string.
std::string strip_markup(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '<') {
      std::size_t close = text.find('>', i + 1);
      if (close == std::string_view::npos) break;
      i = close + 1;
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = true;  // leading whitespace trimmed
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
        c == '\v') {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out.push_back(' ');
      in_space = false;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::optional<std::int64_t> try_parse_timestamp_ms(std::string_view text) {
  std::size_t dot = text.rfind('.');
  if (dot == std::string_view::npos) return std::nullopt;
  std::string_view frac = text.substr(dot + 1);
  if (frac.size() != 3 || !all_digits(frac)) return std::nullopt;
  std::string_view clock = text.substr(0, dot);

  std::array<std::string_view, 3> parts{};
  std::size_t count = 0;
  while (!clock.empty()) {
    if (count == 3) return std::nullopt;
    std::size_t colon = clock.find(':');
    parts[count++] = clock.substr(0, colon);
    if (colon == std::string_view::npos) break;
    clock.remove_prefix(colon + 1);
    if (clock.empty()) return std::nullopt;  // trailing ':'
  }
  if (count < 2) return std::nullopt;

  std::int64_t hours = 0;
  std::size_t first = 0;
  if (count == 3) {
    std::string_view h = parts[0];
    if (h.size() < 2 || !all_digits(h)) return std::nullopt;
    if (std::from_chars(h.data(), h.data() + h.size(), hours).ec !=
        std::errc{})
      return std::nullopt;
    first = 1;
  }
  auto minutes = parse_two_digit(parts[first], 59);
  auto seconds = parse_two_digit(parts[first + 1], 59);
  if (!minutes || !seconds) return std::nullopt;

  std::int64_t ms = ((frac[0] - '0') * 100 + (frac[1] - '0') * 10 +
                     (frac[2] - '0'));
  return ((hours * 60 + *minutes) * 60 + *seconds) * 1000 + ms;
}

std::int64_t parse_timestamp_ms(std::string_view text) {
  auto ms = try_parse_timestamp_ms(text);
  if (!ms) throw BadTimestamp(std::string(text));
  return *ms;
}

CueTrack parse_vtt(std::string_view bytes, std::string language,
                   SourceKind source) {
  CueTrack track;
  track.language = std::move(language);
  track.source = source;

  if (bytes.starts_with("\xEF\xBB\xBF")) bytes.remove_prefix(3);

  std::string decoded;
  if (sanitize_utf8(bytes, decoded))
    track.warnings.push_back("invalid UTF-8 sequences replaced with U+FFFD");

  // CRLF / lone CR -> LF before any grammar work.
  std::string text;
  text.reserve(decoded.size());
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    if (decoded[i] == '\r') {
      text.push_back('\n');
      if (i + 1 < decoded.size() && decoded[i + 1] == '\n') ++i;
    } else {
      text.push_back(decoded[i]);
    }
  }

  auto lines = split_lines(text);
  if (lines.empty() || !starts_block_keyword(lines[0], "WEBVTT")) throw NotVtt();

  std::size_t i = 1;
  auto skip_blanks = [&] {
    while (i < lines.size() && is_blank(lines[i])) ++i;
  };
  auto skip_block = [&] {
    while (i < lines.size() && !is_blank(lines[i])) ++i;
  };

  skip_blanks();
  while (i < lines.size()) {
    std::string_view line = lines[i];
    if (starts_block_keyword(line, "NOTE") ||
        starts_block_keyword(line, "STYLE") ||
        starts_block_keyword(line, "REGION")) {
      skip_block();
      skip_blanks();
      continue;
    }

    // Optional cue identifier: any line without "-->" right before the
    // timing line.
    std::string_view timing = line;
    if (timing.find("-->") == std::string_view::npos) {
      ++i;
      if (i >= lines.size() || is_blank(lines[i]) ||
          lines[i].find("-->") == std::string_view::npos) {
        track.warnings.push_back("skipped malformed cue block at line " +
                                 std::to_string(i));
        skip_block();
        skip_blanks();
        continue;
      }
      timing = lines[i];
    }

    std::size_t arrow = timing.find("-->");
    auto trim = [](std::string_view s) {
      while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
      while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
      return s;
    };
    std::string_view start_text = trim(timing.substr(0, arrow));
    std::string_view rest = trim(timing.substr(arrow + 3));
    // Cue settings follow the end timestamp, separated by whitespace.
    std::size_t end_len = rest.find_first_of(" \t");
    std::string_view end_text =
        end_len == std::string_view::npos ? rest : rest.substr(0, end_len);

    auto start_ms = try_parse_timestamp_ms(start_text);
    auto end_ms = try_parse_timestamp_ms(end_text);
    if (!start_ms || !end_ms) {
      track.warnings.push_back("skipped cue with bad timing at line " +
                               std::to_string(i + 1));
      skip_block();
      skip_blanks();
      continue;
    }

    ++i;
    std::string payload;
    while (i < lines.size() && !is_blank(lines[i])) {
      if (!payload.empty()) payload.push_back(' ');
      payload.append(lines[i]);
      ++i;
    }
    track.cues.push_back(Cue{*start_ms, *end_ms, std::move(payload)});
    skip_blanks();
  }
  return track;
}

CueTrack normalize_track(CueTrack track) {
  std::vector<Cue> cleaned;
  cleaned.reserve(track.cues.size());
  for (Cue& cue : track.cues) {
    cue.text = collapse_whitespace(strip_markup(cue.text));
    if (cue.text.empty()) continue;
    if (cue.end_ms < cue.start_ms) {
      track.warnings.push_back("dropped cue with end before start at " +
                               format_seconds(cue.start_ms) + "s");
      continue;
    }
    cleaned.push_back(std::move(cue));
  }
  std::stable_sort(cleaned.begin(), cleaned.end(),
                   [](const Cue& a, const Cue& b) {
                     return a.start_ms < b.start_ms;
                   });
  // Rolling-caption dedup: adjacent kept cues only, case-sensitive.
  std::vector<Cue> kept;
  kept.reserve(cleaned.size());
  for (Cue& cue : cleaned) {
    if (!kept.empty() && kept.back().text == cue.text) continue;
    kept.push_back(std::move(cue));
  }
  track.cues = std::move(kept);
  return track;
}

std::string track_text(const CueTrack& track) {
  std::string out;
  for (const Cue& cue : track.cues) {
    if (!out.empty()) out.push_back(' ');
    out.append(cue.text);
  }
  return out;
}

std::string format_seconds(std::int64_t ms) {
  char buf[32];
  std::int64_t sign = ms < 0 ? -1 : 1;
  std::int64_t abs_ms = ms * sign;
  std::snprintf(buf, sizeof(buf), "%s%lld.%03lld", sign < 0 ? "-" : "",
                static_cast<long long>(abs_ms / 1000),
                static_cast<long long>(abs_ms % 1000));
  return buf;
}

}  // namespace subtext::vtt
