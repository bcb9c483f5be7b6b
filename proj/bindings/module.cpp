#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "subtext/pipeline.hpp"
#include "subtext/version.hpp"

namespace py = pybind11;
using namespace subtext;

namespace {

TranscriptMap transcript_map(const std::vector<Transcript>& transcripts) {
  TranscriptMap map;
  for (const Transcript& t : transcripts) map.emplace(t.post_id, t);
  return map;
}

py::object fetch_result_to_py(FetchResult result) {
  if (auto* payload = std::get_if<SubtitlePayload>(&result))
    return py::cast(std::move(*payload));
  return py::cast(std::get<FetchError>(std::move(result)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "TikTok subtitle mining pipeline: ingest Zeeschuimer/4CAT "
            "captures, select and fetch platform subtitle tracks, parse "
            "WebVTT into transcripts, export datasets and coverage reports.";
  m.attr("__version__") = kVersion;

  // Translators run newest-first: the base goes in first so subclasses
  // keep their specific python types.
  py::register_exception<SubtextError>(m, "SubtextError", PyExc_RuntimeError);
  py::register_exception<NotVtt>(m, "NotVttError", PyExc_ValueError);
  py::register_exception<BadTimestamp>(m, "BadTimestampError", PyExc_ValueError);

  py::enum_<SourceKind>(m, "SourceKind")
      .value("AUTOMATIC_SPEECH", SourceKind::AutomaticSpeech)
      .value("MACHINE_TRANSLATION", SourceKind::MachineTranslation)
      .value("CREATOR_CAPTION", SourceKind::CreatorCaption)
      .value("UNKNOWN", SourceKind::Unknown);

  py::enum_<ItemErrorKind>(m, "ItemErrorKind")
      .value("MALFORMED_JSON", ItemErrorKind::MalformedJson)
      .value("MISSING_ID", ItemErrorKind::MissingId)
      .value("UNRECOGNIZED_SHAPE", ItemErrorKind::UnrecognizedShape);

  py::enum_<FetchErrorKind>(m, "FetchErrorKind")
      .value("OFFLINE_MISS", FetchErrorKind::OfflineMiss)
      .value("EXPIRED", FetchErrorKind::Expired)
      .value("NETWORK_EXHAUSTED", FetchErrorKind::NetworkExhausted)
      .value("EMPTY_BODY", FetchErrorKind::EmptyBody);

  py::enum_<TranscriptStatus>(m, "TranscriptStatus")
      .value("OK", TranscriptStatus::Ok)
      .value("NO_DESCRIPTOR", TranscriptStatus::NoDescriptor)
      .value("FETCH_FAILED", TranscriptStatus::FetchFailed)
      .value("UNSUPPORTED_FORMAT", TranscriptStatus::UnsupportedFormat)
      .value("PARSE_FAILED", TranscriptStatus::ParseFailed);

  py::class_<SubtitleDescriptor>(m, "SubtitleDescriptor")
      .def(py::init<>())
      .def_readwrite("language", &SubtitleDescriptor::language)
      .def_readwrite("format", &SubtitleDescriptor::format)
      .def_readwrite("source", &SubtitleDescriptor::source)
      .def_readwrite("url", &SubtitleDescriptor::url)
      .def_readwrite("url_key", &SubtitleDescriptor::url_key)
      .def_readwrite("size_bytes", &SubtitleDescriptor::size_bytes)
      .def("__repr__", [](const SubtitleDescriptor& d) {
        return "<SubtitleDescriptor " + d.language + " " +
               std::string(to_string(d.source)) + ">";
      });

  py::class_<vtt::Cue>(m, "Cue")
      .def(py::init<>())
      .def_readwrite("start_ms", &vtt::Cue::start_ms)
      .def_readwrite("end_ms", &vtt::Cue::end_ms)
      .def_readwrite("text", &vtt::Cue::text)
      .def_property_readonly("start_s", &vtt::Cue::start_s)
      .def_property_readonly("end_s", &vtt::Cue::end_s);

  py::class_<vtt::CueTrack>(m, "CueTrack")
      .def(py::init<>())
      .def_readwrite("cues", &vtt::CueTrack::cues)
      .def_readwrite("language", &vtt::CueTrack::language)
      .def_readwrite("source", &vtt::CueTrack::source)
      .def_readwrite("warnings", &vtt::CueTrack::warnings);

  py::class_<Metrics>(m, "Metrics")
      .def(py::init<>())
      .def_readwrite("plays", &Metrics::plays)
      .def_readwrite("likes", &Metrics::likes)
      .def_readwrite("comments", &Metrics::comments)
      .def_readwrite("shares", &Metrics::shares);

  py::class_<MusicInfo>(m, "MusicInfo")
      .def(py::init<>())
      .def_readwrite("music_id", &MusicInfo::music_id)
      .def_readwrite("title", &MusicInfo::title)
      .def_readwrite("original", &MusicInfo::original);

  py::class_<RawRef>(m, "RawRef")
      .def_readonly("source_path", &RawRef::source_path)
      .def_readonly("line_number", &RawRef::line_number);

  py::class_<PostRecord>(m, "PostRecord")
      .def(py::init<>())
      .def_readwrite("id", &PostRecord::id)
      .def_readwrite("author", &PostRecord::author)
      .def_readwrite("description", &PostRecord::description)
      .def_readwrite("hashtags", &PostRecord::hashtags)
      .def_readwrite("created_at", &PostRecord::created_at)
      .def_readwrite("metrics", &PostRecord::metrics)
      .def_readwrite("music", &PostRecord::music)
      .def_readwrite("subtitle_descriptors", &PostRecord::subtitle_descriptors)
      .def_readwrite("query", &PostRecord::query)
      .def_readonly("raw", &PostRecord::raw)
      .def("__repr__",
           [](const PostRecord& p) { return "<PostRecord id=" + p.id + ">"; });

  py::class_<ItemError>(m, "ItemError")
      .def_readonly("line_number", &ItemError::line_number)
      .def_readonly("kind", &ItemError::kind)
      .def_readonly("message", &ItemError::message);

  py::class_<IngestResult>(m, "IngestResult")
      .def_readonly("posts", &IngestResult::posts)
      .def_readonly("errors", &IngestResult::errors)
      .def_readonly("lines_total", &IngestResult::lines_total)
      .def_readonly("lines_blank", &IngestResult::lines_blank)
      .def_readonly("transcripts", &IngestResult::transcripts);

  py::class_<DedupResult>(m, "DedupResult")
      .def_readonly("posts", &DedupResult::posts)
      .def_readonly("dropped", &DedupResult::dropped);

  py::class_<FetchConfig>(m, "FetchConfig")
      .def(py::init<>())
      .def_readwrite("max_concurrent", &FetchConfig::max_concurrent)
      .def_readwrite("requests_per_second", &FetchConfig::requests_per_second)
      .def_readwrite("max_retries", &FetchConfig::max_retries)
      .def_readwrite("backoff_base_ms", &FetchConfig::backoff_base_ms)
      .def_readwrite("timeout_ms", &FetchConfig::timeout_ms)
      .def_readwrite("cache_dir", &FetchConfig::cache_dir)
      .def_readwrite("offline", &FetchConfig::offline)
      .def_readwrite("refetch", &FetchConfig::refetch);

  py::class_<SubtitlePayload>(m, "SubtitlePayload")
      .def_readonly("descriptor", &SubtitlePayload::descriptor)
      .def_property_readonly(
          "bytes", [](const SubtitlePayload& p) { return py::bytes(p.bytes); })
      .def_readonly("fetched_at", &SubtitlePayload::fetched_at)
      .def_readonly("cache_hit", &SubtitlePayload::cache_hit)
      .def_readonly("attempts", &SubtitlePayload::attempts);

  py::class_<FetchError>(m, "FetchError")
      .def_readonly("kind", &FetchError::kind)
      .def_readonly("message", &FetchError::message)
      .def_readonly("attempts", &FetchError::attempts);

  py::class_<Fetcher>(m, "Fetcher")
      .def(py::init([](FetchConfig config) {
             return std::make_unique<Fetcher>(std::move(config));
           }),
           py::arg("config"))
      .def(
          "fetch",
          [](Fetcher& fetcher, const SubtitleDescriptor& descriptor,
             const std::string& post_id) {
            return fetch_result_to_py(fetcher.fetch(descriptor, post_id));
          },
          py::arg("descriptor"), py::arg("post_id"),
          "Returns SubtitlePayload on success, FetchError otherwise.",
          py::call_guard<py::gil_scoped_release>());

  py::class_<Transcript>(m, "Transcript")
      .def(py::init<>())
      .def_readwrite("post_id", &Transcript::post_id)
      .def_readwrite("language", &Transcript::language)
      .def_readwrite("source", &Transcript::source)
      .def_readwrite("text", &Transcript::text)
      .def_readwrite("word_count", &Transcript::word_count)
      .def_readwrite("cue_count", &Transcript::cue_count)
      .def_readwrite("speech_duration_ms", &Transcript::speech_duration_ms)
      .def_readwrite("status", &Transcript::status)
      .def_readwrite("fetch_error", &Transcript::fetch_error)
      .def_property_readonly("speech_duration_s", &Transcript::speech_duration_s)
      .def_property_readonly("has_speech", &Transcript::has_speech)
      .def("__repr__", [](const Transcript& t) {
        return "<Transcript " + t.post_id + " " + status_string(t) + ">";
      });

  py::class_<CoverageRow>(m, "CoverageRow")
      .def_readonly("query", &CoverageRow::query)
      .def_readonly("total_items", &CoverageRow::total_items)
      .def_readonly("with_descriptor", &CoverageRow::with_descriptor)
      .def_readonly("fetched_ok", &CoverageRow::fetched_ok)
      .def_readonly("with_speech", &CoverageRow::with_speech)
      .def_readonly("descriptor_rate", &CoverageRow::descriptor_rate)
      .def_readonly("speech_rate", &CoverageRow::speech_rate)
      .def_readonly("degenerate", &CoverageRow::degenerate);

  py::class_<CoverageReport>(m, "CoverageReport")
      .def_readonly("rows", &CoverageReport::rows);

  py::class_<LengthStats>(m, "LengthStats")
      .def_readonly("n", &LengthStats::n)
      .def_readonly("word_count_min", &LengthStats::word_count_min)
      .def_readonly("word_count_max", &LengthStats::word_count_max)
      .def_readonly("word_count_mean", &LengthStats::word_count_mean)
      .def_readonly("word_count_median", &LengthStats::word_count_median)
      .def_readonly("word_count_p90", &LengthStats::word_count_p90)
      .def_readonly("speech_duration_mean_s", &LengthStats::speech_duration_mean_s)
      .def_readonly("token_count", &LengthStats::token_count)
      .def_readonly("type_count", &LengthStats::type_count)
      .def_readonly("top_terms", &LengthStats::top_terms)
      .def_readonly("histogram", &LengthStats::histogram);

  // --- subtitle_index ------------------------------------------------
  m.def("classify_source", &classify_source, py::arg("tag"));
  m.def(
      "extract_descriptors",
      [](const std::string& item_json) {
        auto item = nlohmann::json::parse(item_json, nullptr, false);
        if (item.is_discarded())
          throw py::value_error("item_json is not valid JSON");
        DescriptorScan scan = extract_descriptors(item);
        return py::make_tuple(scan.descriptors, scan.skipped);
      },
      py::arg("item_json"),
      "Returns (descriptors, skipped_count) for one item payload.");
  m.def(
      "select_track",
      [](const std::vector<SubtitleDescriptor>& descriptors,
         const std::vector<std::string>& prefs) -> std::optional<SubtitleDescriptor> {
        const SubtitleDescriptor* chosen = select_track(descriptors, prefs);
        if (chosen == nullptr) return std::nullopt;
        return *chosen;
      },
      py::arg("descriptors"), py::arg("prefs") = std::vector<std::string>{});

  // --- vtt -------------------------------------------------------------
  m.def(
      "parse_timestamp",
      [](const std::string& text) {
        return static_cast<double>(vtt::parse_timestamp_ms(text)) / 1000.0;
      },
      py::arg("text"), "WebVTT timestamp to seconds; raises on bad input.");
  m.def("parse_timestamp_ms", &vtt::parse_timestamp_ms, py::arg("text"));
  m.def(
      "parse_vtt",
      [](const py::bytes& data, const std::string& language,
         SourceKind source) {
        return vtt::parse_vtt(std::string(data), language, source);
      },
      py::arg("data"), py::arg("language") = "",
      py::arg("source") = SourceKind::Unknown);
  m.def("normalize_track", &vtt::normalize_track, py::arg("track"));
  m.def("track_text", &vtt::track_text, py::arg("track"));

  // --- ingest ----------------------------------------------------------
  m.def("read_ndjson", &read_ndjson, py::arg("path"), py::arg("query") = "");
  m.def("read_4cat_csv", &read_4cat_csv, py::arg("path"), py::arg("query") = "");
  m.def("dedup_posts", &dedup_posts, py::arg("posts"));
  m.def(
      "parse_post",
      [](const std::string& line_json, std::size_t line_number,
         const std::string& source_path) -> py::object {
        auto payload = nlohmann::json::parse(line_json, nullptr, false);
        if (payload.is_discarded() || !payload.is_object())
          throw py::value_error("line_json is not a JSON object");
        auto parsed =
            parse_post(RawCapture{line_number, std::move(payload), source_path});
        if (auto* error = std::get_if<ItemError>(&parsed))
          return py::cast(std::move(*error));
        return py::cast(std::get<PostRecord>(std::move(parsed)));
      },
      py::arg("line_json"), py::arg("line_number") = 1,
      py::arg("source_path") = "<memory>",
      "Returns PostRecord or ItemError for one captured item.");

  // --- fetcher ---------------------------------------------------------
  m.def("cache_key", &cache_key, py::arg("descriptor"), py::arg("post_id"));

  // --- exporter ---------------------------------------------------------
  m.def(
      "build_transcript_from_track",
      [](const PostRecord& post, const SubtitleDescriptor& descriptor,
         const vtt::CueTrack& normalized) {
        FetchResult ok = SubtitlePayload{descriptor, "x", 0, false, 1};
        StageOutcomes outcomes;
        outcomes.selected = &descriptor;
        outcomes.fetch = &ok;
        outcomes.normalized = &normalized;
        return build_transcript(post, outcomes);
      },
      py::arg("post"), py::arg("descriptor"), py::arg("normalized_track"),
      "Assemble an Ok transcript from an already-normalized track.");
  m.def(
      "embed_csv",
      [](const std::vector<PostRecord>& posts,
         const std::vector<Transcript>& transcripts,
         const std::filesystem::path& path, const std::string& mode) {
        return embed_csv(posts, transcript_map(transcripts), path,
                         mode == "speech_only" ? EmbedMode::SpeechOnly
                                               : EmbedMode::EmbedAll);
      },
      py::arg("posts"), py::arg("transcripts"), py::arg("path"),
      py::arg("mode") = "embed_all");
  m.def(
      "write_corpus",
      [](const std::vector<PostRecord>& posts,
         const std::vector<Transcript>& transcripts,
         const std::filesystem::path& dir, const std::string& layout) {
        return write_corpus(posts, transcript_map(transcripts), dir,
                            layout == "single" ? CorpusLayout::SingleFileLines
                                               : CorpusLayout::PerPostFiles);
      },
      py::arg("posts"), py::arg("transcripts"), py::arg("dir"),
      py::arg("layout") = "per_post");
  m.def(
      "write_cue_csv",
      [](const std::vector<PostRecord>& posts,
         const std::map<std::string, vtt::CueTrack>& tracks,
         const std::filesystem::path& path) {
        return write_cue_csv(posts, tracks, path);
      },
      py::arg("posts"), py::arg("tracks"), py::arg("path"));

  // --- report ------------------------------------------------------------
  m.def(
      "coverage_by_query",
      [](const std::vector<PostRecord>& posts,
         const std::vector<Transcript>& transcripts) {
        return coverage_by_query(posts, transcript_map(transcripts));
      },
      py::arg("posts"), py::arg("transcripts"));
  m.def(
      "speech_stats",
      [](const std::vector<Transcript>& transcripts, int k,
         const std::vector<std::string>& stopwords) {
        return speech_stats(transcript_map(transcripts), k, stopwords);
      },
      py::arg("transcripts"), py::arg("k") = 25,
      py::arg("stopwords") = std::vector<std::string>{});
  m.def("tokenize",
        [](const std::string& text) { return tokenize(text); },
        py::arg("text"));
  m.def("render_coverage_csv", &render_coverage_csv, py::arg("report"),
        py::arg("path"));
  m.def("render_coverage_json", &render_coverage_json, py::arg("report"),
        py::arg("path"));
  m.def("render_coverage_svg", &render_coverage_svg, py::arg("report"),
        py::arg("path"));
  m.def("render_stats_csv", &render_stats_csv, py::arg("stats"), py::arg("path"));
  m.def("render_stats_json", &render_stats_json, py::arg("stats"),
        py::arg("path"));
  m.def("render_stats_svg", &render_stats_svg, py::arg("stats"), py::arg("path"));

  // --- pipeline ------------------------------------------------------------
  m.def(
      "run_pipeline",
      [](const std::vector<std::pair<std::string, std::string>>& inputs,
         const std::vector<std::string>& prefs, bool all_languages,
         FetchConfig fetch, const std::string& mode, const std::string& corpus,
         const std::filesystem::path& out_dir, bool do_fetch, bool do_export,
         bool do_stats, int top_k, std::optional<std::int64_t> fixed_clock) {
        PipelineOptions options;
        for (const auto& [path, query] : inputs)
          options.inputs.push_back(InputSpec{path, query});
        options.prefs = prefs;
        options.all_languages = all_languages;
        options.fetch = std::move(fetch);
        options.mode = mode == "speech_only" ? EmbedMode::SpeechOnly
                                             : EmbedMode::EmbedAll;
        options.corpus = corpus == "single" ? CorpusLayout::SingleFileLines
                                            : CorpusLayout::PerPostFiles;
        options.out_dir = out_dir;
        options.stages = StageSelection{do_fetch, do_export, do_stats};
        options.top_k = top_k;
        if (fixed_clock.has_value())
          options.clock = [at = *fixed_clock] { return at; };

        PipelineResult result;
        {
          py::gil_scoped_release release;
          result = run_pipeline(options);
        }
        py::dict out;
        out["posts"] = py::cast(result.posts);
        out["transcripts"] = py::cast(result.transcripts);
        out["tracks"] = py::cast(result.tracks);
        out["exit_code"] = result.exit_code;
        out["manifest"] = py::module_::import("json").attr("loads")(
            result.manifest.to_json().dump());
        return out;
      },
      py::arg("inputs"), py::arg("prefs") = std::vector<std::string>{},
      py::arg("all_languages") = false, py::arg("fetch") = FetchConfig{},
      py::arg("mode") = "embed_all", py::arg("corpus") = "per_post",
      py::arg("out_dir") = std::filesystem::path{}, py::arg("do_fetch") = true,
      py::arg("do_export") = true, py::arg("do_stats") = true,
      py::arg("top_k") = 25, py::arg("fixed_clock") = std::nullopt,
      "Run ingest->select->fetch->parse->export->stats; returns a dict "
      "with posts, transcripts, tracks, exit_code and the manifest.");
}
