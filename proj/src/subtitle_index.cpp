#include "subtext/subtitle_index.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

#include <nlohmann/json.hpp>

namespace subtext {

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

bool is_absolute_url(std::string_view url) {
  return url.starts_with("http://") || url.starts_with("https://");
}

std::string json_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) return {};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  if (it->is_number_unsigned()) return std::to_string(it->get<std::uint64_t>());
  return {};
}

int source_rank(SourceKind kind) {
  switch (kind) {
    case SourceKind::CreatorCaption: return 0;
    case SourceKind::AutomaticSpeech: return 1;
    case SourceKind::MachineTranslation: return 2;
    case SourceKind::Unknown: return 3;
  }
  return 3;
}

}  // namespace

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::AutomaticSpeech: return "asr";
    case SourceKind::MachineTranslation: return "mt";
    case SourceKind::CreatorCaption: return "creator_caption";
    case SourceKind::Unknown: return "unknown";
  }
  return "unknown";
}

SourceKind classify_source(std::string_view tag) {
  std::string t = ascii_lower(trim(tag));
  if (t == "asr") return SourceKind::AutomaticSpeech;
  if (t == "mt") return SourceKind::MachineTranslation;
  if (t == "creator_caption") return SourceKind::CreatorCaption;
  return SourceKind::Unknown;
}

DescriptorScan extract_descriptors(const nlohmann::json& item) {
  DescriptorScan scan;
  if (!item.is_object()) return scan;
  auto video = item.find("video");
  if (video == item.end() || !video->is_object()) return scan;
  auto infos = video->find("subtitleInfos");
  if (infos == video->end() || !infos->is_array()) return scan;

  for (const auto& entry : *infos) {
    if (!entry.is_object()) {
      ++scan.skipped;
      continue;
    }
    SubtitleDescriptor d;
    d.language = ascii_lower(json_string(entry, "LanguageCodeName"));
    d.url = json_string(entry, "Url");
    if (d.language.empty() || d.url.empty() || !is_absolute_url(d.url)) {
      ++scan.skipped;
      continue;
    }
    d.format = ascii_lower(json_string(entry, "Format"));
    d.source = classify_source(json_string(entry, "Source"));
    d.url_key = json_string(entry, "Version");
    if (auto it = entry.find("Size");
        it != entry.end() && it->is_number_integer() && it->get<std::int64_t>() >= 0)
      d.size_bytes = it->get<std::int64_t>();
    scan.descriptors.push_back(std::move(d));
  }
  return scan;
}

const SubtitleDescriptor* select_track(
    const std::vector<SubtitleDescriptor>& descriptors,
    const std::vector<std::string>& prefs) {
  if (descriptors.empty()) return nullptr;

  auto pref_rank = [&](const SubtitleDescriptor& d) -> std::size_t {
    if (prefs.empty()) return 0;
    for (std::size_t i = 0; i < prefs.size(); ++i) {
      if (d.language.starts_with(ascii_lower(prefs[i]))) return i;
    }
    return prefs.size();
  };
  auto key = [&](const SubtitleDescriptor& d) {
    return std::tuple<std::size_t, int, std::string_view, std::string_view,
                      std::string_view>(pref_rank(d), source_rank(d.source),
                                        d.language, d.url_key, d.url);
  };

  const SubtitleDescriptor* best = &descriptors.front();
  for (const auto& d : descriptors) {
    if (key(d) < key(*best)) best = &d;
  }
  return best;
}

}  // namespace subtext
