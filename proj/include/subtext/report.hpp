#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "subtext/exporter.hpp"

namespace subtext {

// Per-query funnel: items -> items with a descriptor -> fetched tracks
// -> nonempty speech. All levels reported so any reading of
// "occurrence of speech data" can be reproduced.
struct CoverageRow {
  std::string query;
  std::int64_t total_items = 0;
  std::int64_t with_descriptor = 0;
  std::int64_t fetched_ok = 0;  // track bytes obtained (parsed or not)
  std::int64_t with_speech = 0;
  double descriptor_rate = 0.0;
  double speech_rate = 0.0;
  bool degenerate = false;  // total_items == 0, rates pinned to 0
};

struct CoverageReport {
  std::vector<CoverageRow> rows;  // first-appearance order of queries
};

// Speech-length and vocabulary summary over Ok transcripts with
// nonempty text. Aggregates absent when n == 0.
struct LengthStats {
  std::int64_t n = 0;
  std::optional<std::int64_t> word_count_min;
  std::optional<std::int64_t> word_count_max;
  std::optional<double> word_count_mean;
  std::optional<std::int64_t> word_count_median;  // lower median
  std::optional<std::int64_t> word_count_p90;     // nearest rank
  std::optional<double> speech_duration_mean_s;
  std::int64_t token_count = 0;  // normalized tokens
  std::int64_t type_count = 0;   // distinct tokens
  std::vector<std::pair<std::string, std::int64_t>> top_terms;

  // Word-count histogram, 10 equal-width bins over [min, max]; empty
  // when n == 0. Feeds the SVG rendering.
  double histogram_lo = 0.0;
  double histogram_bin_width = 0.0;
  std::vector<std::int64_t> histogram;
};

CoverageReport coverage_by_query(const std::vector<PostRecord>& posts,
                                 const TranscriptMap& transcripts);

// Tokens: whitespace-split, ASCII-lowercased, surrounding punctuation
// stripped. top_terms capped at k, ordered by count desc then term asc;
// stopwords (already lowercased) are excluded from top_terms only.
LengthStats speech_stats(const TranscriptMap& transcripts, int k,
                         const std::vector<std::string>& stopwords = {});

// Lossless serializations plus a deterministic self-contained SVG:
// horizontal speech_rate bars per query for coverage, a 10-bin
// word-count histogram for stats. Throw PathUnwritable.
void render_coverage_csv(const CoverageReport& report,
                         const std::filesystem::path& path);
void render_coverage_json(const CoverageReport& report,
                          const std::filesystem::path& path);
void render_coverage_svg(const CoverageReport& report,
                         const std::filesystem::path& path);
CoverageReport parse_coverage_json(const std::filesystem::path& path);

void render_stats_csv(const LengthStats& stats,
                      const std::filesystem::path& path);
void render_stats_json(const LengthStats& stats,
                       const std::filesystem::path& path);
void render_stats_svg(const LengthStats& stats,
                      const std::filesystem::path& path);
LengthStats parse_stats_json(const std::filesystem::path& path);

// Shared with speech_stats; exposed for reuse.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace subtext
