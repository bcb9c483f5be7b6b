#include "subtext/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <unordered_map>
#include <unordered_set>

#include "subtext/csv.hpp"

namespace subtext {

namespace {

// ---------------------------------------------------------------------
// Capture schema table. Every payload path the ingester knows about is
// listed here, so a Zeeschuimer/TikTok schema shift is a one-file edit.
//
//   item roots:      "payload", "data", then the object itself
//   id:              id                      (string or integer)
//   author:          author.uniqueId | author (string)
//   description:     desc
//   created:         createTime              (integer or numeric string)
//   metrics:         stats.{playCount,diggCount,commentCount,shareCount}
//   music:           music.{id,title,original}
//   hashtags:        challenges[].title, textExtra[].hashtagName,
//                    plus inline #tokens in desc
//   subtitles:       video.subtitleInfos[]   (see subtitle_index.cpp)
// ---------------------------------------------------------------------
constexpr const char* kItemRoots[] = {"payload", "data"};

std::string ascii_lower(std::string s) {
  for (char& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Integer ids are canonicalized to decimal strings; TikTok ids exceed
// the 53-bit double-safe range, so only exact JSON integer types count.
std::string id_string(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_unsigned())
    return std::to_string(value.get<std::uint64_t>());
  if (value.is_number_integer())
    return std::to_string(value.get<std::int64_t>());
  return {};
}

std::int64_t int_or_zero(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) return 0;
  if (it->is_number_unsigned()) {
    auto v = it->get<std::uint64_t>();
    return v > static_cast<std::uint64_t>(INT64_MAX)
               ? INT64_MAX
               : static_cast<std::int64_t>(v);
  }
  if (it->is_number_integer()) return it->get<std::int64_t>();
  if (it->is_string()) {
    const auto& s = it->get_ref<const std::string&>();
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
  }
  return 0;
}

std::int64_t metric_or_zero(const nlohmann::json& obj, const char* key) {
  return std::max<std::int64_t>(0, int_or_zero(obj, key));
}

// Inline hashtag scan: '#' followed by word characters. Any non-ASCII
// byte counts as a word character so Unicode tags survive; comparison
// happens on ASCII-lowercased text.
void scan_inline_hashtags(const std::string& description,
                          std::vector<std::string>& out) {
  auto is_word = [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c >= 0x80;
  };
  for (std::size_t i = 0; i < description.size(); ++i) {
    if (description[i] != '#') continue;
    std::size_t j = i + 1;
    while (j < description.size() &&
           is_word(static_cast<unsigned char>(description[j])))
      ++j;
    if (j > i + 1) out.push_back(description.substr(i + 1, j - i - 1));
    i = j - 1;
  }
}

}  // namespace

std::string_view to_string(ItemErrorKind kind) {
  switch (kind) {
    case ItemErrorKind::MalformedJson: return "malformed_json";
    case ItemErrorKind::MissingId: return "missing_id";
    case ItemErrorKind::UnrecognizedShape: return "unrecognized_shape";
  }
  return "unrecognized_shape";
}

std::vector<std::string> extract_hashtags(
    const std::vector<std::string>& structured,
    const std::string& description) {
  std::vector<std::string> raw = structured;
  scan_inline_hashtags(description, raw);

  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (std::string& tag : raw) {
    if (!tag.empty() && tag.front() == '#') tag.erase(0, 1);
    tag = ascii_lower(std::move(tag));
    if (tag.empty()) continue;
    if (tag.find_first_of(" \t\r\n#") != std::string::npos) continue;
    if (seen.insert(tag).second) out.push_back(std::move(tag));
  }
  return out;
}

NdjsonReader::NdjsonReader(const std::filesystem::path& path)
    : source_path_(path.string()) {
  in_.open(path, std::ios::binary);
  if (!in_) throw FileUnreadable(path.string());
}

std::optional<std::variant<RawCapture, ItemError>> NdjsonReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_number_;
    ++lines_total_;
    if (line_number_ == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      ++lines_blank_;
      continue;
    }
    nlohmann::json payload =
        nlohmann::json::parse(line, /*cb=*/nullptr, /*allow_exceptions=*/false);
    if (payload.is_discarded()) {
      return ItemError{line_number_, ItemErrorKind::MalformedJson,
                       "line is not valid JSON"};
    }
    if (!payload.is_object()) {
      return ItemError{line_number_, ItemErrorKind::UnrecognizedShape,
                       "top-level JSON value is not an object"};
    }
    return RawCapture{line_number_, std::move(payload), source_path_};
  }
  return std::nullopt;
}

std::variant<PostRecord, ItemError> parse_post(const RawCapture& raw) {
  const nlohmann::json* item = &raw.payload;
  for (const char* root : kItemRoots) {
    auto it = raw.payload.find(root);
    if (it == raw.payload.end()) continue;
    if (!it->is_object()) {
      return ItemError{raw.line_number, ItemErrorKind::UnrecognizedShape,
                       std::string("item root `") + root +
                           "` is not an object"};
    }
    item = &*it;
    break;
  }

  PostRecord post;
  if (auto it = item->find("id"); it != item->end()) post.id = id_string(*it);
  if (post.id.empty()) {
    return ItemError{raw.line_number, ItemErrorKind::MissingId,
                     "no post id at any known path"};
  }

  if (auto it = item->find("author"); it != item->end()) {
    if (it->is_object()) {
      if (auto uid = it->find("uniqueId"); uid != it->end() && uid->is_string())
        post.author = uid->get<std::string>();
    } else if (it->is_string()) {
      post.author = it->get<std::string>();
    }
  }
  if (auto it = item->find("desc"); it != item->end() && it->is_string())
    post.description = it->get<std::string>();
  post.created_at = int_or_zero(*item, "createTime");

  if (auto it = item->find("stats"); it != item->end() && it->is_object()) {
    post.metrics.plays = metric_or_zero(*it, "playCount");
    post.metrics.likes = metric_or_zero(*it, "diggCount");
    post.metrics.comments = metric_or_zero(*it, "commentCount");
    post.metrics.shares = metric_or_zero(*it, "shareCount");
  }

  if (auto it = item->find("music"); it != item->end() && it->is_object()) {
    MusicInfo music;
    if (auto id = it->find("id"); id != it->end()) music.music_id = id_string(*id);
    if (auto title = it->find("title"); title != it->end() && title->is_string())
      music.title = title->get<std::string>();
    if (auto orig = it->find("original");
        orig != it->end() && orig->is_boolean())
      music.original = orig->get<bool>();
    post.music = std::move(music);
  }

  std::vector<std::string> structured_tags;
  if (auto it = item->find("challenges"); it != item->end() && it->is_array()) {
    for (const auto& challenge : *it) {
      if (challenge.is_object()) {
        if (auto t = challenge.find("title");
            t != challenge.end() && t->is_string())
          structured_tags.push_back(t->get<std::string>());
      }
    }
  }
  if (auto it = item->find("textExtra"); it != item->end() && it->is_array()) {
    for (const auto& extra : *it) {
      if (extra.is_object()) {
        if (auto t = extra.find("hashtagName");
            t != extra.end() && t->is_string() && !t->get<std::string>().empty())
          structured_tags.push_back(t->get<std::string>());
      }
    }
  }
  post.hashtags = extract_hashtags(structured_tags, post.description);

  DescriptorScan scan = extract_descriptors(*item);
  post.subtitle_descriptors = std::move(scan.descriptors);
  post.descriptors_skipped = scan.skipped;
  post.raw = RawRef{raw.source_path, raw.line_number};
  return post;
}

IngestResult read_ndjson(const std::filesystem::path& path,
                         const std::string& query) {
  NdjsonReader reader(path);
  IngestResult result;
  while (auto item = reader.next()) {
    if (auto* error = std::get_if<ItemError>(&*item)) {
      result.errors.push_back(std::move(*error));
      continue;
    }
    auto parsed = parse_post(std::get<RawCapture>(*item));
    if (auto* error = std::get_if<ItemError>(&parsed)) {
      result.errors.push_back(std::move(*error));
    } else {
      auto& post = std::get<PostRecord>(parsed);
      post.query = query;
      result.posts.push_back(std::move(post));
    }
  }
  result.lines_total = reader.lines_total();
  result.lines_blank = reader.lines_blank();
  return result;
}

IngestResult read_4cat_csv(const std::filesystem::path& path,
                           const std::string& query) {
  csv::Reader reader(path);
  auto header_row = reader.next();
  if (!header_row) throw HeaderMissing("empty CSV: " + path.string());

  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header_row->size(); ++i)
    column.emplace((*header_row)[i], i);
  if (!column.count("id"))
    throw HeaderMissing("no `id` column in " + path.string());

  auto cell = [&](const csv::Row& row, const char* name) -> std::string {
    auto it = column.find(name);
    if (it == column.end() || it->second >= row.size()) return {};
    return row[it->second];
  };
  auto int_cell = [&](const csv::Row& row, const char* name) -> std::int64_t {
    std::string s = cell(row, name);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc{} && ptr == s.data() + s.size() ? v : 0;
  };

  IngestResult result;
  std::size_t row_index = 1;  // header was row 1
  while (auto row = reader.next()) {
    ++row_index;
    result.lines_total++;
    if (row->size() == 1 && (*row)[0].empty()) {  // stray blank line
      result.lines_blank++;
      continue;
    }
    if (row->size() != header_row->size()) {
      result.errors.push_back(
          ItemError{row_index, ItemErrorKind::UnrecognizedShape,
                    "column count differs from header"});
      continue;
    }
    PostRecord post;
    post.id = cell(*row, "id");
    if (post.id.empty()) {
      result.errors.push_back(ItemError{row_index, ItemErrorKind::MissingId,
                                        "row has empty id cell"});
      continue;
    }
    post.author = cell(*row, "author");
    post.description = cell(*row, "body");
    post.created_at = int_cell(*row, "timestamp");
    post.metrics.plays = std::max<std::int64_t>(0, int_cell(*row, "plays"));
    post.metrics.likes = std::max<std::int64_t>(0, int_cell(*row, "likes"));
    post.metrics.comments =
        std::max<std::int64_t>(0, int_cell(*row, "comments"));
    post.metrics.shares = std::max<std::int64_t>(0, int_cell(*row, "shares"));
    if (std::string title = cell(*row, "music_title"); !title.empty())
      post.music = MusicInfo{"", title, false};

    std::vector<std::string> structured;
    {
      std::string tags = cell(*row, "hashtags");
      std::size_t start = 0;
      while (start < tags.size()) {
        std::size_t end = tags.find_first_of(" ,", start);
        if (end == std::string::npos) end = tags.size();
        if (end > start) structured.push_back(tags.substr(start, end - start));
        start = end + 1;
      }
    }
    post.hashtags = extract_hashtags(structured, post.description);

    // A descriptor is only reconstructable when the source dataset
    // carried a URL column; the exporter's own output does not.
    if (std::string url = cell(*row, "subtitle_url"); !url.empty()) {
      SubtitleDescriptor d;
      d.url = std::move(url);
      d.language = ascii_lower(cell(*row, "subtitle_language"));
      d.format = ascii_lower(cell(*row, "subtitle_format"));
      if (d.format.empty()) d.format = "webvtt";
      d.source = classify_source(cell(*row, "subtitle_source"));
      d.url_key = cell(*row, "subtitle_url_key");
      if (!d.language.empty()) post.subtitle_descriptors.push_back(std::move(d));
    }

    post.query = cell(*row, "query");
    if (post.query.empty()) post.query = query;
    post.raw = RawRef{path.string(), row_index};

    // Re-ingesting an enriched dataset keeps its speech columns so the
    // transcripts survive without a refetch.
    if (column.count("subtitle_status")) {
      Transcript t;
      t.post_id = post.id;
      std::optional<FetchErrorKind> kind;
      t.status = status_from_string(cell(*row, "subtitle_status"), &kind);
      t.fetch_error = kind;
      t.language = cell(*row, "subtitle_language");
      t.source = classify_source(cell(*row, "subtitle_source"));
      t.text = cell(*row, "subtitle_text");
      t.word_count = int_cell(*row, "subtitle_word_count");
      t.cue_count = int_cell(*row, "subtitle_cue_count");
      std::string duration = cell(*row, "subtitle_duration_s");
      if (auto dot = duration.find('.'); dot != std::string::npos) {
        std::string frac = (duration.substr(dot + 1) + "000").substr(0, 3);
        std::int64_t seconds = 0, ms = 0;
        std::from_chars(duration.data(), duration.data() + dot, seconds);
        std::from_chars(frac.data(), frac.data() + frac.size(), ms);
        t.speech_duration_ms = seconds * 1000 + ms;
      }
      result.transcripts.emplace(post.id, std::move(t));
    }
    result.posts.push_back(std::move(post));
  }
  return result;
}

DedupResult dedup_posts(std::vector<PostRecord> posts) {
  DedupResult result;
  result.posts.reserve(posts.size());
  std::unordered_set<std::string> seen;
  for (PostRecord& post : posts) {
    if (seen.insert(post.id).second) {
      result.posts.push_back(std::move(post));
    } else {
      ++result.dropped;
    }
  }
  return result;
}

}  // namespace subtext
