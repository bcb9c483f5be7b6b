#include "subtext/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "subtext/csv.hpp"

namespace subtext {

namespace {

std::string format_rate(double value) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& data) {
  std::error_code ec;
  auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PathUnwritable(path.string());
  out << data;
  if (!out.flush()) throw PathUnwritable(path.string());
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string svg_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

nlohmann::ordered_json coverage_row_json(const CoverageRow& row) {
  return nlohmann::ordered_json{
      {"query", row.query},
      {"total_items", row.total_items},
      {"with_descriptor", row.with_descriptor},
      {"fetched_ok", row.fetched_ok},
      {"with_speech", row.with_speech},
      {"descriptor_rate", row.descriptor_rate},
      {"speech_rate", row.speech_rate},
      {"degenerate", row.degenerate},
  };
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i == start) break;
    std::string_view word = text.substr(start, i - start);
    // Surrounding ASCII punctuation stripped, inner punctuation kept.
    while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.front())))
      word.remove_prefix(1);
    while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.back())))
      word.remove_suffix(1);
    if (word.empty()) continue;
    std::string token(word);
    for (char& c : token)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    tokens.push_back(std::move(token));
  }
  return tokens;
}

CoverageReport coverage_by_query(const std::vector<PostRecord>& posts,
                                 const TranscriptMap& transcripts) {
  CoverageReport report;
  std::unordered_map<std::string, std::size_t> index;

  for (const PostRecord& post : posts) {
    auto [it, inserted] = index.emplace(post.query, report.rows.size());
    if (inserted) {
      CoverageRow row;
      row.query = post.query;
      report.rows.push_back(std::move(row));
    }
    CoverageRow& row = report.rows[it->second];
    ++row.total_items;
    if (!post.subtitle_descriptors.empty()) ++row.with_descriptor;
    auto t = transcripts.find(post.id);
    if (t != transcripts.end()) {
      const Transcript& transcript = t->second;
      if (transcript.status == TranscriptStatus::Ok ||
          transcript.status == TranscriptStatus::ParseFailed)
        ++row.fetched_ok;
      if (transcript.has_speech()) ++row.with_speech;
    }
  }

  for (CoverageRow& row : report.rows) {
    if (row.total_items == 0) {
      row.degenerate = true;
      continue;
    }
    row.descriptor_rate = static_cast<double>(row.with_descriptor) /
                          static_cast<double>(row.total_items);
    row.speech_rate = static_cast<double>(row.with_speech) /
                      static_cast<double>(row.total_items);
  }
  return report;
}

LengthStats speech_stats(const TranscriptMap& transcripts, int k,
                         const std::vector<std::string>& stopwords) {
  LengthStats stats;
  std::vector<std::int64_t> word_counts;
  std::int64_t duration_ms_sum = 0;
  std::map<std::string, std::int64_t> term_counts;

  for (const auto& [id, t] : transcripts) {
    if (!t.has_speech()) continue;
    ++stats.n;
    word_counts.push_back(t.word_count);
    duration_ms_sum += t.speech_duration_ms;
    for (auto& token : tokenize(t.text)) {
      ++stats.token_count;
      ++term_counts[std::move(token)];
    }
  }
  stats.type_count = static_cast<std::int64_t>(term_counts.size());

  if (stats.n > 0) {
    std::sort(word_counts.begin(), word_counts.end());
    std::int64_t sum = 0;
    for (auto wc : word_counts) sum += wc;
    const std::size_t n = word_counts.size();
    stats.word_count_min = word_counts.front();
    stats.word_count_max = word_counts.back();
    stats.word_count_mean = static_cast<double>(sum) / static_cast<double>(n);
    stats.word_count_median = word_counts[(n - 1) / 2];
    std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.9 * static_cast<double>(n)));  // nearest rank, 1-based
    stats.word_count_p90 = word_counts[rank - 1];
    stats.speech_duration_mean_s = static_cast<double>(duration_ms_sum) /
                                   1000.0 / static_cast<double>(stats.n);

    constexpr int kBins = 10;
    stats.histogram_lo = static_cast<double>(word_counts.front());
    stats.histogram_bin_width =
        (static_cast<double>(word_counts.back()) - stats.histogram_lo + 1.0) /
        kBins;
    stats.histogram.assign(kBins, 0);
    for (auto wc : word_counts) {
      auto bin = static_cast<std::size_t>(
          (static_cast<double>(wc) - stats.histogram_lo) /
          stats.histogram_bin_width);
      if (bin >= static_cast<std::size_t>(kBins)) bin = kBins - 1;
      ++stats.histogram[bin];
    }
  }

  std::set<std::string> stop(stopwords.begin(), stopwords.end());
  std::vector<std::pair<std::string, std::int64_t>> terms;
  terms.reserve(term_counts.size());
  for (const auto& [term, count] : term_counts) {
    if (stop.count(term)) continue;
    terms.emplace_back(term, count);
  }
  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (k >= 0 && terms.size() > static_cast<std::size_t>(k)) terms.resize(k);
  stats.top_terms = std::move(terms);
  return stats;
}

void render_coverage_csv(const CoverageReport& report,
                         const std::filesystem::path& path) {
  csv::Writer writer(path);
  writer.write_row({"query", "total_items", "with_descriptor", "fetched_ok",
                    "with_speech", "descriptor_rate", "speech_rate",
                    "degenerate"});
  for (const CoverageRow& row : report.rows) {
    writer.write_row({row.query, std::to_string(row.total_items),
                      std::to_string(row.with_descriptor),
                      std::to_string(row.fetched_ok),
                      std::to_string(row.with_speech),
                      format_rate(row.descriptor_rate),
                      format_rate(row.speech_rate),
                      row.degenerate ? "true" : "false"});
  }
}

void render_coverage_json(const CoverageReport& report,
                          const std::filesystem::path& path) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const CoverageRow& row : report.rows) rows.push_back(coverage_row_json(row));
  write_text_file(path,
                  nlohmann::ordered_json{{"rows", std::move(rows)}}.dump(2) +
                      "\n");
}

CoverageReport parse_coverage_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileUnreadable(path.string());
  auto doc = nlohmann::json::parse(in);
  CoverageReport report;
  for (const auto& row : doc.at("rows")) {
    CoverageRow r;
    r.query = row.at("query").get<std::string>();
    r.total_items = row.at("total_items").get<std::int64_t>();
    r.with_descriptor = row.at("with_descriptor").get<std::int64_t>();
    r.fetched_ok = row.at("fetched_ok").get<std::int64_t>();
    r.with_speech = row.at("with_speech").get<std::int64_t>();
    r.descriptor_rate = row.at("descriptor_rate").get<double>();
    r.speech_rate = row.at("speech_rate").get<double>();
    r.degenerate = row.at("degenerate").get<bool>();
    report.rows.push_back(std::move(r));
  }
  return report;
}

void render_coverage_svg(const CoverageReport& report,
                         const std::filesystem::path& path) {
  constexpr double kWidth = 800.0;
  constexpr double kRowHeight = 26.0;
  constexpr double kTop = 40.0;
  constexpr double kLabelWidth = 200.0;
  constexpr double kBarSpan = 520.0;
  const double height = kTop + kRowHeight * report.rows.size() + 16.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << svg_number(height) << "\" viewBox=\"0 0 " << kWidth
      << " " << svg_number(height) << "\">\n"
      << "  <style>\n"
      << "    text{font-family:sans-serif;font-size:12px;fill:#222;}\n"
      << "    .title{font-size:14px;font-weight:bold;}\n"
      << "    .bar{fill:#4a90d9;}\n"
      << "    .axis{stroke:#999;stroke-width:1;}\n"
      << "  </style>\n"
      << "  <text class=\"title\" x=\"16\" y=\"24\">Speech coverage by query"
      << " (speech_rate)</text>\n";

  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const CoverageRow& row = report.rows[i];
    const double y = kTop + kRowHeight * i;
    const double bar = row.speech_rate * kBarSpan;
    char value[96];
    std::snprintf(value, sizeof(value), "%.3f (%lld/%lld)", row.speech_rate,
                  static_cast<long long>(row.with_speech),
                  static_cast<long long>(row.total_items));
    svg << "  <text x=\"16\" y=\"" << svg_number(y + 14.0) << "\">"
        << xml_escape(row.query.empty() ? "(untagged)" : row.query)
        << "</text>\n"
        << "  <rect class=\"bar\" x=\"" << svg_number(kLabelWidth) << "\" y=\""
        << svg_number(y) << "\" width=\"" << svg_number(bar)
        << "\" height=\"18\"/>\n"
        << "  <text x=\"" << svg_number(kLabelWidth + bar + 6.0) << "\" y=\""
        << svg_number(y + 14.0) << "\">" << value << "</text>\n";
  }
  svg << "  <line class=\"axis\" x1=\"" << svg_number(kLabelWidth)
      << "\" y1=\"" << svg_number(kTop - 6.0) << "\" x2=\""
      << svg_number(kLabelWidth) << "\" y2=\""
      << svg_number(kTop + kRowHeight * report.rows.size()) << "\"/>\n"
      << "</svg>\n";
  write_text_file(path, svg.str());
}

void render_stats_csv(const LengthStats& stats,
                      const std::filesystem::path& path) {
  csv::Writer writer(path);
  writer.write_row({"kind", "name", "value"});
  auto scalar = [&](const char* name, const std::string& value) {
    writer.write_row({"scalar", name, value});
  };
  scalar("n", std::to_string(stats.n));
  if (stats.n > 0) {
    scalar("word_count_min", std::to_string(*stats.word_count_min));
    scalar("word_count_max", std::to_string(*stats.word_count_max));
    scalar("word_count_mean", format_rate(*stats.word_count_mean));
    scalar("word_count_median", std::to_string(*stats.word_count_median));
    scalar("word_count_p90", std::to_string(*stats.word_count_p90));
    scalar("speech_duration_mean_s", format_rate(*stats.speech_duration_mean_s));
  }
  scalar("token_count", std::to_string(stats.token_count));
  scalar("type_count", std::to_string(stats.type_count));
  if (!stats.histogram.empty()) {
    scalar("histogram_lo", format_rate(stats.histogram_lo));
    scalar("histogram_bin_width", format_rate(stats.histogram_bin_width));
    for (std::size_t i = 0; i < stats.histogram.size(); ++i)
      writer.write_row({"histogram", std::to_string(i),
                        std::to_string(stats.histogram[i])});
  }
  for (const auto& [term, count] : stats.top_terms)
    writer.write_row({"term", term, std::to_string(count)});
}

void render_stats_json(const LengthStats& stats,
                       const std::filesystem::path& path) {
  nlohmann::ordered_json word_count;
  if (stats.n > 0) {
    word_count = nlohmann::ordered_json{
        {"min", *stats.word_count_min},     {"max", *stats.word_count_max},
        {"mean", *stats.word_count_mean},   {"median", *stats.word_count_median},
        {"p90", *stats.word_count_p90},
    };
  } else {
    word_count = nullptr;
  }
  nlohmann::ordered_json doc{
      {"n", stats.n},
      {"word_count", std::move(word_count)},
      {"speech_duration_mean_s",
       stats.n > 0 ? nlohmann::ordered_json(*stats.speech_duration_mean_s)
                   : nlohmann::ordered_json(nullptr)},
      {"token_count", stats.token_count},
      {"type_count", stats.type_count},
  };
  nlohmann::ordered_json terms = nlohmann::ordered_json::array();
  for (const auto& [term, count] : stats.top_terms)
    terms.push_back(nlohmann::ordered_json::array({term, count}));
  doc["top_terms"] = std::move(terms);
  doc["histogram"] = nlohmann::ordered_json{
      {"lo", stats.histogram_lo},
      {"bin_width", stats.histogram_bin_width},
      {"counts", stats.histogram},
  };
  write_text_file(path, doc.dump(2) + "\n");
}

LengthStats parse_stats_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileUnreadable(path.string());
  auto doc = nlohmann::json::parse(in);
  LengthStats stats;
  stats.n = doc.at("n").get<std::int64_t>();
  if (!doc.at("word_count").is_null()) {
    const auto& wc = doc.at("word_count");
    stats.word_count_min = wc.at("min").get<std::int64_t>();
    stats.word_count_max = wc.at("max").get<std::int64_t>();
    stats.word_count_mean = wc.at("mean").get<double>();
    stats.word_count_median = wc.at("median").get<std::int64_t>();
    stats.word_count_p90 = wc.at("p90").get<std::int64_t>();
  }
  if (!doc.at("speech_duration_mean_s").is_null())
    stats.speech_duration_mean_s = doc.at("speech_duration_mean_s").get<double>();
  stats.token_count = doc.at("token_count").get<std::int64_t>();
  stats.type_count = doc.at("type_count").get<std::int64_t>();
  for (const auto& term : doc.at("top_terms"))
    stats.top_terms.emplace_back(term.at(0).get<std::string>(),
                                 term.at(1).get<std::int64_t>());
  if (auto it = doc.find("histogram"); it != doc.end()) {
    stats.histogram_lo = it->at("lo").get<double>();
    stats.histogram_bin_width = it->at("bin_width").get<double>();
    stats.histogram = it->at("counts").get<std::vector<std::int64_t>>();
  }
  return stats;
}

void render_stats_svg(const LengthStats& stats,
                      const std::filesystem::path& path) {
  constexpr double kWidth = 800.0;
  constexpr double kHeight = 360.0;
  constexpr double kLeft = 60.0;
  constexpr double kBottom = 320.0;
  constexpr double kPlotWidth = 700.0;
  constexpr double kPlotHeight = 260.0;
  constexpr int kBins = 10;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n"
      << "  <style>\n"
      << "    text{font-family:sans-serif;font-size:12px;fill:#222;}\n"
      << "    .title{font-size:14px;font-weight:bold;}\n"
      << "    .bin{fill:#4a90d9;}\n"
      << "    .axis{stroke:#999;stroke-width:1;}\n"
      << "  </style>\n"
      << "  <text class=\"title\" x=\"16\" y=\"24\">Transcript word counts ("
      << stats.n << " transcripts)</text>\n";

  if (stats.n == 0 || stats.histogram.empty()) {
    svg << "  <text x=\"16\" y=\"48\">no transcripts with speech</text>\n"
        << "</svg>\n";
    write_text_file(path, svg.str());
    return;
  }

  std::int64_t peak = 1;
  for (auto count : stats.histogram) peak = std::max(peak, count);

  const double slot = kPlotWidth / static_cast<double>(kBins);
  for (std::size_t i = 0; i < stats.histogram.size(); ++i) {
    const double h = kPlotHeight * static_cast<double>(stats.histogram[i]) /
                     static_cast<double>(peak);
    const double x = kLeft + slot * static_cast<double>(i);
    const double bin_lo = stats.histogram_lo +
                          stats.histogram_bin_width * static_cast<double>(i);
    char label[64];
    std::snprintf(label, sizeof(label), "%.0f", bin_lo);
    svg << "  <rect class=\"bin\" x=\"" << svg_number(x + 2.0) << "\" y=\""
        << svg_number(kBottom - h) << "\" width=\"" << svg_number(slot - 4.0)
        << "\" height=\"" << svg_number(h) << "\"/>\n"
        << "  <text x=\"" << svg_number(x + 2.0) << "\" y=\""
        << svg_number(kBottom + 16.0) << "\">" << label << "</text>\n";
  }
  svg << "  <line class=\"axis\" x1=\"" << svg_number(kLeft) << "\" y1=\""
      << svg_number(kBottom) << "\" x2=\"" << svg_number(kLeft + kPlotWidth)
      << "\" y2=\"" << svg_number(kBottom) << "\"/>\n"
      << "  <text x=\"" << svg_number(kLeft) << "\" y=\""
      << svg_number(kBottom - kPlotHeight - 10.0) << "\">peak bin: " << peak
      << "</text>\n"
      << "</svg>\n";
  write_text_file(path, svg.str());
}

}  // namespace subtext
