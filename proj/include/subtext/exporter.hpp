#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subtext/fetcher.hpp"
#include "subtext/ingest.hpp"
#include "subtext/transcript.hpp"
#include "subtext/vtt.hpp"

namespace subtext {

// Pipeline stage outcomes for one post, as observed. Null pointers mean
// "stage not reached".
struct StageOutcomes {
  const SubtitleDescriptor* selected = nullptr;
  bool unsupported_format = false;
  const FetchResult* fetch = nullptr;
  const vtt::CueTrack* normalized = nullptr;  // null after fetch => ParseFailed
};

Transcript build_transcript(const PostRecord& post,
                            const StageOutcomes& outcomes);

using TrackMap = std::map<std::string, vtt::CueTrack>;

enum class EmbedMode { EmbedAll, SpeechOnly };
enum class CorpusLayout { PerPostFiles, SingleFileLines };

// 4CAT-compatible CSV: base columns id, author, body, timestamp,
// hashtags (space-joined), plays, likes, comments, shares, music_title,
// query, then subtitle_status, subtitle_language, subtitle_source,
// subtitle_text, subtitle_word_count, subtitle_duration_s,
// subtitle_cue_count. Rows follow `posts` order. Returns the data row
// count. Throws PathUnwritable.
std::size_t embed_csv(const std::vector<PostRecord>& posts,
                      const TranscriptMap& transcripts,
                      const std::filesystem::path& path, EmbedMode mode);

// Raw text corpus for transcripts with speech. PerPostFiles writes
// `{post_id}.txt` each with a single trailing newline; SingleFileLines
// writes corpus.txt (one transcript per line, internal newlines become
// spaces) plus corpus.index.csv mapping line -> post_id. Returns the
// file count.
std::size_t write_corpus(const std::vector<PostRecord>& posts,
                         const TranscriptMap& transcripts,
                         const std::filesystem::path& dir,
                         CorpusLayout layout);

// Long-format cue table: post_id, cue_index, start_s, end_s, text,
// ordered by (posts order, cue index). Returns the data row count.
std::size_t write_cue_csv(const std::vector<PostRecord>& posts,
                          const TrackMap& tracks,
                          const std::filesystem::path& path);

std::int64_t count_words(std::string_view text);

}  // namespace subtext
