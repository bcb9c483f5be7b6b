#include "subtext/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "subtext/version.hpp"

namespace subtext {

namespace {

bool is_csv_input(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (char& c : ext)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".csv";
}

bool webvtt_format(const SubtitleDescriptor& descriptor) {
  // Empty format tags are presumed WebVTT; the parser decides.
  return descriptor.format.empty() || descriptor.format == "webvtt";
}

void count_item_error(StageCounts& counts, const ItemError& error) {
  switch (error.kind) {
    case ItemErrorKind::MalformedJson:
      ++counts.item_errors_malformed_json;
      break;
    case ItemErrorKind::MissingId:
      ++counts.item_errors_missing_id;
      break;
    case ItemErrorKind::UnrecognizedShape:
      ++counts.item_errors_unrecognized_shape;
      break;
  }
}

nlohmann::ordered_json counts_json(const StageCounts& c) {
  return nlohmann::ordered_json{
      {"lines_total", c.lines_total},
      {"lines_blank", c.lines_blank},
      {"items", c.items},
      {"item_errors",
       {{"malformed_json", c.item_errors_malformed_json},
        {"missing_id", c.item_errors_missing_id},
        {"unrecognized_shape", c.item_errors_unrecognized_shape},
        {"total", c.item_errors()}}},
      {"posts_unique", c.posts_unique},
      {"duplicates_dropped", c.duplicates_dropped},
      {"descriptors_total", c.descriptors_total},
      {"descriptors_skipped", c.descriptors_skipped},
      {"posts_with_descriptor", c.posts_with_descriptor},
      {"selected", c.selected},
      {"fetched_ok", c.fetched_ok},
      {"fetch_failed",
       {{"offline_miss", c.fetch_failed.offline_miss},
        {"expired", c.fetch_failed.expired},
        {"network_exhausted", c.fetch_failed.network_exhausted},
        {"empty_body", c.fetch_failed.empty_body},
        {"total", c.fetch_failed.total()}}},
      {"unsupported_format", c.unsupported_format},
      {"parse_failed", c.parse_failed},
      {"transcripts_ok", c.transcripts_ok},
      {"with_speech", c.with_speech},
  };
}

}  // namespace

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json input_list = nlohmann::ordered_json::array();
  for (const auto& input : inputs)
    input_list.push_back({{"path", input.path.string()},
                          {"query", input.query}});

  const PipelineOptions& opt = config_snapshot;
  nlohmann::ordered_json config{
      {"prefs", opt.prefs},
      {"all_languages", opt.all_languages},
      {"offline", opt.fetch.offline},
      {"refetch", opt.fetch.refetch},
      {"cache_dir", opt.fetch.effective_cache_dir().string()},
      {"rate", opt.fetch.requests_per_second},
      {"concurrency", opt.fetch.max_concurrent},
      {"retries", opt.fetch.max_retries},
      {"backoff_base_ms", opt.fetch.backoff_base_ms},
      {"timeout_ms", opt.fetch.timeout_ms},
      {"mode", opt.mode == EmbedMode::SpeechOnly ? "speech_only" : "embed_all"},
      {"corpus",
       opt.corpus == CorpusLayout::SingleFileLines ? "single" : "per_post"},
      {"out_dir", opt.out_dir.string()},
      {"top_k", opt.top_k},
  };

  return nlohmann::ordered_json{
      {"tool_version", tool_version},
      {"inputs", std::move(input_list)},
      {"config", std::move(config)},
      {"counts", counts_json(counts)},
      {"started_at", started_at},
      {"finished_at", finished_at},
  };
}

PipelineResult run_pipeline(const PipelineOptions& options) {
  if (options.inputs.empty()) throw ConfigError("no input files given");
  options.fetch.validate();

  PipelineResult result;
  RunManifest& manifest = result.manifest;
  manifest.tool_version = kVersion;
  manifest.inputs = options.inputs;
  manifest.config_snapshot = options;
  manifest.started_at = options.clock();
  StageCounts& counts = manifest.counts;

  // Ingest every input, tagged with its collection query.
  std::vector<PostRecord> all_posts;
  for (const InputSpec& input : options.inputs) {
    IngestResult ingest = is_csv_input(input.path)
                              ? read_4cat_csv(input.path, input.query)
                              : read_ndjson(input.path, input.query);
    counts.lines_total += static_cast<std::int64_t>(ingest.lines_total);
    counts.lines_blank += static_cast<std::int64_t>(ingest.lines_blank);
    counts.items += static_cast<std::int64_t>(ingest.posts.size());
    for (const ItemError& error : ingest.errors) count_item_error(counts, error);
    result.item_errors.insert(result.item_errors.end(), ingest.errors.begin(),
                              ingest.errors.end());
    std::move(ingest.posts.begin(), ingest.posts.end(),
              std::back_inserter(all_posts));
  }

  DedupResult dedup = dedup_posts(std::move(all_posts));
  result.posts = std::move(dedup.posts);
  counts.posts_unique = static_cast<std::int64_t>(result.posts.size());
  counts.duplicates_dropped = static_cast<std::int64_t>(dedup.dropped);

  // Selection.
  std::vector<const SubtitleDescriptor*> selected(result.posts.size(), nullptr);
  for (std::size_t i = 0; i < result.posts.size(); ++i) {
    const PostRecord& post = result.posts[i];
    counts.descriptors_total +=
        static_cast<std::int64_t>(post.subtitle_descriptors.size());
    counts.descriptors_skipped += post.descriptors_skipped;
    if (!post.subtitle_descriptors.empty()) ++counts.posts_with_descriptor;
    selected[i] = select_track(post.subtitle_descriptors, options.prefs);
    if (selected[i] != nullptr) ++counts.selected;
  }

  // Fetch the selected track per post; --all-languages additionally
  // warms the cache with every other advertised track.
  std::vector<FetchResult> fetch_results;
  std::vector<std::optional<std::size_t>> fetch_index(result.posts.size());
  if (options.stages.fetch) {
    Fetcher fetcher(options.fetch, options.clock);
    std::vector<FetchJob> jobs;
    for (std::size_t i = 0; i < result.posts.size(); ++i) {
      if (selected[i] == nullptr) continue;
      if (!webvtt_format(*selected[i])) continue;  // UnsupportedFormat
      fetch_index[i] = jobs.size();
      jobs.push_back(FetchJob{*selected[i], result.posts[i].id});
    }
    if (options.all_languages) {
      std::unordered_set<std::string> planned;
      for (const FetchJob& job : jobs)
        planned.insert(cache_key(job.descriptor, job.post_id));
      for (std::size_t i = 0; i < result.posts.size(); ++i) {
        for (const auto& d : result.posts[i].subtitle_descriptors) {
          if (planned.insert(cache_key(d, result.posts[i].id)).second)
            jobs.push_back(FetchJob{d, result.posts[i].id});
        }
      }
    }
    fetch_results = fetcher.fetch_all(jobs);
  }

  // Parse + assemble transcripts.
  for (std::size_t i = 0; i < result.posts.size(); ++i) {
    const PostRecord& post = result.posts[i];
    StageOutcomes outcomes;
    outcomes.selected = selected[i];
    vtt::CueTrack normalized;
    bool parsed = false;

    if (selected[i] != nullptr && !webvtt_format(*selected[i])) {
      outcomes.unsupported_format = true;
    } else if (fetch_index[i].has_value()) {
      const FetchResult& fetch = fetch_results[*fetch_index[i]];
      outcomes.fetch = &fetch;
      if (const auto* payload = std::get_if<SubtitlePayload>(&fetch)) {
        try {
          normalized = vtt::normalize_track(vtt::parse_vtt(
              payload->bytes, selected[i]->language, selected[i]->source));
          outcomes.normalized = &normalized;
          parsed = true;
        } catch (const NotVtt&) {
          // ParseFailed; normalized stays unset.
        }
      }
    }

    Transcript transcript = build_transcript(post, outcomes);
    switch (transcript.status) {
      case TranscriptStatus::Ok:
        ++counts.fetched_ok;
        ++counts.transcripts_ok;
        if (transcript.has_speech()) ++counts.with_speech;
        break;
      case TranscriptStatus::ParseFailed:
        ++counts.fetched_ok;
        ++counts.parse_failed;
        break;
      case TranscriptStatus::UnsupportedFormat:
        ++counts.unsupported_format;
        break;
      case TranscriptStatus::FetchFailed:
        switch (*transcript.fetch_error) {
          case FetchErrorKind::OfflineMiss:
            ++counts.fetch_failed.offline_miss;
            break;
          case FetchErrorKind::Expired:
            ++counts.fetch_failed.expired;
            break;
          case FetchErrorKind::NetworkExhausted:
            ++counts.fetch_failed.network_exhausted;
            break;
          case FetchErrorKind::EmptyBody:
            ++counts.fetch_failed.empty_body;
            break;
        }
        break;
      case TranscriptStatus::NoDescriptor:
        break;
    }
    if (parsed) result.tracks.emplace(post.id, std::move(normalized));
    result.transcripts.emplace(post.id, std::move(transcript));
  }

  // Output files.
  if ((options.stages.export_files || options.stages.stats) &&
      !options.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) throw PathUnwritable(options.out_dir.string());
  }
  if (options.stages.export_files) {
    if (options.out_dir.empty())
      throw ConfigError("export requires --out <dir>");
    embed_csv(result.posts, result.transcripts, options.out_dir / "dataset.csv",
              options.mode);
    write_corpus(result.posts, result.transcripts, options.out_dir / "corpus",
                 options.corpus);
    write_cue_csv(result.posts, result.tracks, options.out_dir / "cues.csv");
  }
  if (options.stages.stats) {
    if (options.out_dir.empty()) throw ConfigError("stats requires --out <dir>");
    CoverageReport coverage = coverage_by_query(result.posts, result.transcripts);
    render_coverage_csv(coverage, options.out_dir / "coverage.csv");
    render_coverage_json(coverage, options.out_dir / "coverage.json");
    render_coverage_svg(coverage, options.out_dir / "coverage.svg");
    LengthStats stats = speech_stats(result.transcripts, options.top_k);
    render_stats_csv(stats, options.out_dir / "speech_stats.csv");
    render_stats_json(stats, options.out_dir / "speech_stats.json");
    render_stats_svg(stats, options.out_dir / "speech_stats.svg");
  }

  manifest.finished_at = options.clock();

  std::int64_t per_item_errors =
      counts.item_errors() + counts.parse_failed + counts.fetch_failed.expired +
      counts.fetch_failed.network_exhausted + counts.fetch_failed.empty_body;
  if (counts.fetch_failed.offline_miss > 0)
    result.exit_code = 3;
  else if (per_item_errors > 0)
    result.exit_code = 2;

  if ((options.stages.export_files || options.stages.stats) &&
      !options.out_dir.empty()) {
    atomic_write_file(options.out_dir / "manifest.json",
                      manifest.to_json().dump(2) + "\n");
  }
  if (options.manifest_path.has_value()) {
    atomic_write_file(*options.manifest_path,
                      manifest.to_json().dump(2) + "\n");
  }
  return result;
}

InspectReport inspect_inputs(const std::vector<InputSpec>& inputs) {
  if (inputs.empty()) throw ConfigError("no input files given");

  InspectReport report;
  StageCounts& counts = report.counts;
  std::vector<PostRecord> all_posts;
  for (const InputSpec& input : inputs) {
    IngestResult ingest = is_csv_input(input.path)
                              ? read_4cat_csv(input.path, input.query)
                              : read_ndjson(input.path, input.query);
    counts.lines_total += static_cast<std::int64_t>(ingest.lines_total);
    counts.lines_blank += static_cast<std::int64_t>(ingest.lines_blank);
    counts.items += static_cast<std::int64_t>(ingest.posts.size());
    for (const ItemError& error : ingest.errors) count_item_error(counts, error);
    std::move(ingest.posts.begin(), ingest.posts.end(),
              std::back_inserter(all_posts));
  }
  DedupResult dedup = dedup_posts(std::move(all_posts));
  counts.posts_unique = static_cast<std::int64_t>(dedup.posts.size());
  counts.duplicates_dropped = static_cast<std::int64_t>(dedup.dropped);

  for (const PostRecord& post : dedup.posts) {
    counts.descriptors_total +=
        static_cast<std::int64_t>(post.subtitle_descriptors.size());
    counts.descriptors_skipped += post.descriptors_skipped;
    if (!post.subtitle_descriptors.empty()) ++counts.posts_with_descriptor;
    for (const auto& d : post.subtitle_descriptors) {
      ++report.languages[d.language];
      ++report.sources[std::string(to_string(d.source))];
      ++report.formats[d.format.empty() ? "(unspecified)" : d.format];
    }
  }
  if (counts.item_errors() > 0) report.exit_code = 2;
  return report;
}

}  // namespace subtext
