#include "subtext/exporter.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "subtext/csv.hpp"

namespace subtext {

namespace {

std::string join_hashtags(const std::vector<std::string>& tags) {
  std::string out;
  for (const auto& tag : tags) {
    if (!out.empty()) out.push_back(' ');
    out.append(tag);
  }
  return out;
}

const Transcript* find_transcript(const TranscriptMap& transcripts,
                                  const std::string& post_id) {
  auto it = transcripts.find(post_id);
  return it == transcripts.end() ? nullptr : &it->second;
}

}  // namespace

std::int64_t count_words(std::string_view text) {
  std::int64_t count = 0;
  bool in_word = false;
  for (char c : text) {
    bool space = c == ' ' || c == '\t' || c == '\r' || c == '\n' ||
                 c == '\f' || c == '\v';
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

std::string status_string(const Transcript& t) {
  switch (t.status) {
    case TranscriptStatus::Ok: return "ok";
    case TranscriptStatus::NoDescriptor: return "no_descriptor";
    case TranscriptStatus::UnsupportedFormat: return "unsupported_format";
    case TranscriptStatus::ParseFailed: return "parse_failed";
    case TranscriptStatus::FetchFailed:
      return "fetch_failed:" +
             std::string(to_string(
                 t.fetch_error.value_or(FetchErrorKind::NetworkExhausted)));
  }
  return "no_descriptor";
}

TranscriptStatus status_from_string(std::string_view s,
                                    std::optional<FetchErrorKind>* kind) {
  if (kind) kind->reset();
  if (s == "ok") return TranscriptStatus::Ok;
  if (s == "unsupported_format") return TranscriptStatus::UnsupportedFormat;
  if (s == "parse_failed") return TranscriptStatus::ParseFailed;
  if (s.starts_with("fetch_failed")) {
    if (kind) {
      std::string_view tail =
          s.size() > 13 && s[12] == ':' ? s.substr(13) : std::string_view{};
      if (tail == "offline_miss") *kind = FetchErrorKind::OfflineMiss;
      else if (tail == "expired") *kind = FetchErrorKind::Expired;
      else if (tail == "empty_body") *kind = FetchErrorKind::EmptyBody;
      else *kind = FetchErrorKind::NetworkExhausted;
    }
    return TranscriptStatus::FetchFailed;
  }
  return TranscriptStatus::NoDescriptor;
}

Transcript build_transcript(const PostRecord& post,
                            const StageOutcomes& outcomes) {
  Transcript t;
  t.post_id = post.id;

  if (outcomes.selected == nullptr) {
    t.status = TranscriptStatus::NoDescriptor;
    return t;
  }
  t.language = outcomes.selected->language;
  t.source = outcomes.selected->source;

  if (outcomes.unsupported_format) {
    t.status = TranscriptStatus::UnsupportedFormat;
    return t;
  }
  if (outcomes.fetch == nullptr) {
    // Fetch stage never ran; treat as an offline miss so the funnel
    // stays honest.
    t.status = TranscriptStatus::FetchFailed;
    t.fetch_error = FetchErrorKind::OfflineMiss;
    return t;
  }
  if (const auto* error = std::get_if<FetchError>(outcomes.fetch)) {
    t.status = TranscriptStatus::FetchFailed;
    t.fetch_error = error->kind;
    return t;
  }
  const auto& payload = std::get<SubtitlePayload>(*outcomes.fetch);
  t.fetched_at = payload.fetched_at;
  t.cache_hit = payload.cache_hit;

  if (outcomes.normalized == nullptr) {
    t.status = TranscriptStatus::ParseFailed;
    return t;
  }
  const vtt::CueTrack& track = *outcomes.normalized;
  t.status = TranscriptStatus::Ok;
  t.text = vtt::track_text(track);
  t.word_count = count_words(t.text);
  t.cue_count = static_cast<std::int64_t>(track.cues.size());
  for (const auto& cue : track.cues)
    t.speech_duration_ms += cue.end_ms - cue.start_ms;
  return t;
}

std::size_t embed_csv(const std::vector<PostRecord>& posts,
                      const TranscriptMap& transcripts,
                      const std::filesystem::path& path, EmbedMode mode) {
  csv::Writer writer(path);
  writer.write_row({"id", "author", "body", "timestamp", "hashtags", "plays",
                    "likes", "comments", "shares", "music_title", "query",
                    "subtitle_status", "subtitle_language", "subtitle_source",
                    "subtitle_text", "subtitle_word_count",
                    "subtitle_duration_s", "subtitle_cue_count"});

  std::size_t rows = 0;
  for (const PostRecord& post : posts) {
    const Transcript* t = find_transcript(transcripts, post.id);
    bool has_speech = t != nullptr && t->has_speech();
    if (mode == EmbedMode::SpeechOnly && !has_speech) continue;

    csv::Row row{
        post.id,
        post.author,
        post.description,
        std::to_string(post.created_at),
        join_hashtags(post.hashtags),
        std::to_string(post.metrics.plays),
        std::to_string(post.metrics.likes),
        std::to_string(post.metrics.comments),
        std::to_string(post.metrics.shares),
        post.music ? post.music->title : "",
        post.query,
    };
    if (t != nullptr) {
      row.push_back(status_string(*t));
      row.push_back(t->language);
      row.push_back(std::string(to_string(t->source)));
      row.push_back(t->text);
      row.push_back(std::to_string(t->word_count));
      row.push_back(vtt::format_seconds(t->speech_duration_ms));
      row.push_back(std::to_string(t->cue_count));
    } else {
      row.insert(row.end(), {"no_descriptor", "", "unknown", "", "0", "0.000", "0"});
    }
    writer.write_row(row);
    ++rows;
  }
  return rows;
}

std::size_t write_corpus(const std::vector<PostRecord>& posts,
                         const TranscriptMap& transcripts,
                         const std::filesystem::path& dir,
                         CorpusLayout layout) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw PathUnwritable(dir.string());

  std::vector<const Transcript*> speech;
  for (const PostRecord& post : posts) {
    const Transcript* t = find_transcript(transcripts, post.id);
    if (t != nullptr && t->has_speech()) speech.push_back(t);
  }

  if (layout == CorpusLayout::PerPostFiles) {
    for (const Transcript* t : speech) {
      std::ofstream out(dir / (t->post_id + ".txt"),
                        std::ios::binary | std::ios::trunc);
      if (!out) throw PathUnwritable((dir / (t->post_id + ".txt")).string());
      out << t->text << '\n';
    }
    return speech.size();
  }

  std::ofstream corpus(dir / "corpus.txt", std::ios::binary | std::ios::trunc);
  if (!corpus) throw PathUnwritable((dir / "corpus.txt").string());
  csv::Writer index(dir / "corpus.index.csv");
  index.write_row({"line", "post_id"});
  std::size_t line = 0;
  for (const Transcript* t : speech) {
    std::string flat = t->text;
    std::replace(flat.begin(), flat.end(), '\n', ' ');
    std::replace(flat.begin(), flat.end(), '\r', ' ');
    corpus << flat << '\n';
    ++line;
    index.write_row({std::to_string(line), t->post_id});
  }
  return 2;  // corpus.txt + corpus.index.csv
}

std::size_t write_cue_csv(const std::vector<PostRecord>& posts,
                          const TrackMap& tracks,
                          const std::filesystem::path& path) {
  csv::Writer writer(path);
  writer.write_row({"post_id", "cue_index", "start_s", "end_s", "text"});
  std::size_t rows = 0;
  for (const PostRecord& post : posts) {
    auto it = tracks.find(post.id);
    if (it == tracks.end()) continue;
    const auto& cues = it->second.cues;
    for (std::size_t i = 0; i < cues.size(); ++i) {
      writer.write_row({post.id, std::to_string(i),
                        vtt::format_seconds(cues[i].start_ms),
                        vtt::format_seconds(cues[i].end_ms), cues[i].text});
      ++rows;
    }
  }
  return rows;
}

}  // namespace subtext
