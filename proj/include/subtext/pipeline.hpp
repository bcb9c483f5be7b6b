#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "subtext/exporter.hpp"
#include "subtext/fetcher.hpp"
#include "subtext/report.hpp"

namespace subtext {

struct InputSpec {
  std::filesystem::path path;
  std::string query;  // collection-time tag for every item in the file
};

// Which stages a run performs. Subcommands map onto these: inspect =
// none, pull = fetch, export = fetch(offline) + export, stats =
// fetch(offline) + stats, run = everything.
struct StageSelection {
  bool fetch = false;
  bool export_files = false;
  bool stats = false;
};

struct PipelineOptions {
  std::vector<InputSpec> inputs;
  std::vector<std::string> prefs;  // language preferences, lowercased
  bool all_languages = false;      // also cache non-selected tracks
  FetchConfig fetch;
  EmbedMode mode = EmbedMode::EmbedAll;
  CorpusLayout corpus = CorpusLayout::PerPostFiles;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> manifest_path;
  StageSelection stages;
  int top_k = 25;
  Clock clock = system_clock_now;
};

struct FetchFailureCounts {
  std::int64_t offline_miss = 0;
  std::int64_t expired = 0;
  std::int64_t network_exhausted = 0;
  std::int64_t empty_body = 0;

  std::int64_t total() const {
    return offline_miss + expired + network_exhausted + empty_body;
  }
};

struct StageCounts {
  std::int64_t lines_total = 0;
  std::int64_t lines_blank = 0;
  std::int64_t items = 0;
  std::int64_t item_errors_malformed_json = 0;
  std::int64_t item_errors_missing_id = 0;
  std::int64_t item_errors_unrecognized_shape = 0;
  std::int64_t posts_unique = 0;
  std::int64_t duplicates_dropped = 0;
  std::int64_t descriptors_total = 0;
  std::int64_t descriptors_skipped = 0;
  std::int64_t posts_with_descriptor = 0;
  std::int64_t selected = 0;
  std::int64_t fetched_ok = 0;
  FetchFailureCounts fetch_failed;
  std::int64_t unsupported_format = 0;
  std::int64_t parse_failed = 0;
  std::int64_t transcripts_ok = 0;
  std::int64_t with_speech = 0;

  std::int64_t item_errors() const {
    return item_errors_malformed_json + item_errors_missing_id +
           item_errors_unrecognized_shape;
  }
};

struct RunManifest {
  std::string tool_version;
  std::vector<InputSpec> inputs;
  PipelineOptions config_snapshot;  // inputs repeated for convenience
  StageCounts counts;
  std::int64_t started_at = 0;
  std::int64_t finished_at = 0;

  nlohmann::ordered_json to_json() const;
};

// Everything a run computed, for callers that keep going (stats, tests).
struct PipelineResult {
  std::vector<PostRecord> posts;  // deduped, query-tagged
  std::vector<ItemError> item_errors;
  TranscriptMap transcripts;
  TrackMap tracks;  // normalized, Ok posts only
  RunManifest manifest;
  int exit_code = 0;  // 0 ok, 2 per-item errors, 3 offline misses
};

// Runs ingest -> dedup -> select -> fetch -> parse -> export -> stats
// as selected, writes output files under out_dir, and returns the
// result. Fatal problems (unreadable input, unwritable output, bad
// config) throw; per-item problems are counted and reflected in
// exit_code (3 when offline misses occurred, else 2 when any per-item
// error occurred, else 0).
PipelineResult run_pipeline(const PipelineOptions& options);

// Ingest-only census for `inspect`: no selection, no network.
struct InspectReport {
  StageCounts counts;
  std::map<std::string, std::int64_t> languages;  // descriptor languages
  std::map<std::string, std::int64_t> sources;
  std::map<std::string, std::int64_t> formats;
  int exit_code = 0;
};

InspectReport inspect_inputs(const std::vector<InputSpec>& inputs);

}  // namespace subtext
