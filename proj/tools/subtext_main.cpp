#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subtext/pipeline.hpp"
#include "subtext/version.hpp"

namespace {

using namespace subtext;

struct CliArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> queries;
  std::string prefs;
  bool all_languages = false;
  bool offline = false;
  bool refetch = false;
  std::string cache_dir;
  double rate = 2.0;
  int concurrency = 4;
  int retries = 3;
  std::string mode = "embed_all";
  std::string corpus = "per_post";
  std::string out;
  std::string manifest;
};

std::vector<InputSpec> input_specs(const CliArgs& args) {
  std::vector<InputSpec> inputs;
  for (std::size_t i = 0; i < args.inputs.size(); ++i) {
    inputs.push_back(InputSpec{
        args.inputs[i], i < args.queries.size() ? args.queries[i] : ""});
  }
  return inputs;
}

PipelineOptions to_options(const CliArgs& args, StageSelection stages,
                           bool force_offline) {
  PipelineOptions options;
  options.inputs = input_specs(args);
  if (!args.prefs.empty()) {
    std::string pref;
    for (char c : args.prefs + ",") {
      if (c == ',') {
        if (!pref.empty()) options.prefs.push_back(pref);
        pref.clear();
      } else if (c != ' ') {
        pref.push_back(
            static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
    }
  }
  options.all_languages = args.all_languages;
  options.fetch.offline = args.offline || force_offline;
  options.fetch.refetch = args.refetch;
  options.fetch.cache_dir = args.cache_dir;
  options.fetch.requests_per_second = args.rate;
  options.fetch.max_concurrent = args.concurrency;
  options.fetch.max_retries = args.retries;
  options.mode =
      args.mode == "speech_only" ? EmbedMode::SpeechOnly : EmbedMode::EmbedAll;
  options.corpus = args.corpus == "single" ? CorpusLayout::SingleFileLines
                                           : CorpusLayout::PerPostFiles;
  options.out_dir = args.out;
  if (!args.manifest.empty()) options.manifest_path = args.manifest;
  options.stages = stages;

  // Deterministic runs (tests, reproducibility audits) can pin the
  // run clock to a fixed unix timestamp.
  if (const char* fixed = std::getenv("SUBTEXT_FIXED_CLOCK");
      fixed != nullptr && *fixed != '\0') {
    std::int64_t at = std::atoll(fixed);
    options.clock = [at] { return at; };
  }
  return options;
}

void print_counts_summary(const StageCounts& counts) {
  std::printf("items            %lld (errors %lld, blank lines %lld)\n",
              static_cast<long long>(counts.items),
              static_cast<long long>(counts.item_errors()),
              static_cast<long long>(counts.lines_blank));
  std::printf("unique posts     %lld (duplicates dropped %lld)\n",
              static_cast<long long>(counts.posts_unique),
              static_cast<long long>(counts.duplicates_dropped));
  std::printf("with descriptor  %lld (descriptors %lld, skipped %lld)\n",
              static_cast<long long>(counts.posts_with_descriptor),
              static_cast<long long>(counts.descriptors_total),
              static_cast<long long>(counts.descriptors_skipped));
}

int run_command(const CliArgs& args, StageSelection stages, bool force_offline) {
  PipelineOptions options = to_options(args, stages, force_offline);
  PipelineResult result = run_pipeline(options);
  const StageCounts& counts = result.manifest.counts;
  print_counts_summary(counts);
  std::printf("fetched ok       %lld (failed %lld: offline %lld, expired %lld,"
              " network %lld, empty %lld)\n",
              static_cast<long long>(counts.fetched_ok),
              static_cast<long long>(counts.fetch_failed.total()),
              static_cast<long long>(counts.fetch_failed.offline_miss),
              static_cast<long long>(counts.fetch_failed.expired),
              static_cast<long long>(counts.fetch_failed.network_exhausted),
              static_cast<long long>(counts.fetch_failed.empty_body));
  std::printf("transcripts ok   %lld (with speech %lld, parse failed %lld,"
              " unsupported %lld)\n",
              static_cast<long long>(counts.transcripts_ok),
              static_cast<long long>(counts.with_speech),
              static_cast<long long>(counts.parse_failed),
              static_cast<long long>(counts.unsupported_format));
  return result.exit_code;
}

int run_inspect(const CliArgs& args) {
  InspectReport report = inspect_inputs(input_specs(args));
  print_counts_summary(report.counts);
  auto print_histogram = [](const char* title,
                            const std::map<std::string, std::int64_t>& rows) {
    if (rows.empty()) return;
    std::printf("%s:\n", title);
    for (const auto& [key, count] : rows)
      std::printf("  %-16s %lld\n", key.c_str(),
                  static_cast<long long>(count));
  };
  print_histogram("descriptor languages", report.languages);
  print_histogram("descriptor sources", report.sources);
  print_histogram("descriptor formats", report.formats);
  if (!args.manifest.empty()) {
    RunManifest manifest;
    manifest.tool_version = kVersion;
    manifest.inputs = input_specs(args);
    manifest.counts = report.counts;
    atomic_write_file(args.manifest, manifest.to_json().dump(2) + "\n");
  }
  return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subtext — mine TikTok platform subtitles from Zeeschuimer"
               " captures into transcripts, 4CAT-compatible CSV, text corpora"
               " and coverage reports"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "subtext.toml",
                 "Flat key=value config file mirroring the flags");
  app.require_subcommand(1);

  // Common options live on the top level so the config file stays flat;
  // subcommands fall through to them.
  CliArgs args;
  app.add_option("--input", args.inputs,
                 "Capture file (NDJSON or 4CAT CSV); repeatable")
      ->required();
  app.add_option("--query", args.queries,
                 "Collection query tag for the matching --input; repeatable");
  app.add_option("--prefs", args.prefs,
                 "Comma-separated language preferences, e.g. en,fr");
  app.add_flag("--all-languages", args.all_languages,
               "Also cache every non-selected subtitle track");
  app.add_flag("--offline", args.offline, "Serve only from cache; no network");
  app.add_flag("--refetch", args.refetch, "Bypass cached entries");
  app.add_option("--cache-dir", args.cache_dir, "Subtitle cache directory")
      ->envname("SUBTEXT_CACHE_DIR");
  app.add_option("--rate", args.rate, "Global requests per second")
      ->envname("SUBTEXT_RATE");
  app.add_option("--concurrency", args.concurrency,
                 "Maximum requests in flight");
  app.add_option("--retries", args.retries, "Retries per request");
  app.add_option("--mode", args.mode, "Dataset rows: embed_all | speech_only")
      ->check(CLI::IsMember({"embed_all", "speech_only"}));
  app.add_option("--corpus", args.corpus, "Corpus layout: per_post | single")
      ->check(CLI::IsMember({"per_post", "single"}));
  app.add_option("--out", args.out, "Output directory");
  app.add_option("--manifest", args.manifest,
                 "Also write the run manifest to this path");

  auto* inspect = app.add_subcommand(
      "inspect", "Ingest captures and report a descriptor census (no network)");
  auto* pull = app.add_subcommand(
      "pull", "Ingest, select one track per post and fetch into the cache");
  auto* do_export = app.add_subcommand(
      "export", "Build transcripts from the cache and write csv/corpus/cues");
  auto* stats = app.add_subcommand(
      "stats", "Compute coverage and speech-length reports from the cache");
  auto* run = app.add_subcommand("run", "All stages: pull, export, stats");
  for (auto* sub : {inspect, pull, do_export, stats, run}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints the message and usage pointer
    return code == 0 ? 0 : 1;
  }

  try {
    if (inspect->parsed()) return run_inspect(args);
    if (pull->parsed())
      return run_command(args, StageSelection{true, false, false},
                         /*force_offline=*/false);
    if (do_export->parsed())
      return run_command(args, StageSelection{true, true, false},
                         /*force_offline=*/true);
    if (stats->parsed())
      return run_command(args, StageSelection{true, false, true},
                         /*force_offline=*/true);
    if (run->parsed())
      return run_command(args, StageSelection{true, true, true},
                         /*force_offline=*/false);
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  }
  return 0;
}
