#include "subtext/vtt.hpp"

#include <doctest.h>

#include <random>
#include <regex>

#include "test_util.hpp"

using namespace subtext;
using vtt::Cue;
using vtt::CueTrack;

namespace {

CueTrack make_track(std::vector<Cue> cues) {
  CueTrack track;
  track.cues = std::move(cues);
  return track;
}

// Independent reference normalizer: regex-based, rule by rule.
CueTrack oracle_normalize(CueTrack track) {
  static const std::regex tag("<[^>]*>");
  static const std::regex open_tag("<.*$");
  static const std::regex spaces("[ \t\r\n\f\v]+");

  std::vector<Cue> stage;
  for (Cue cue : track.cues) {
    std::string text = std::regex_replace(cue.text, tag, "");
    text = std::regex_replace(text, open_tag, "");
    text = std::regex_replace(text, spaces, " ");
    if (!text.empty() && text.front() == ' ') text.erase(text.begin());
    if (!text.empty() && text.back() == ' ') text.pop_back();
    cue.text = text;
    if (cue.text.empty()) continue;
    if (cue.end_ms < cue.start_ms) continue;
    stage.push_back(std::move(cue));
  }
  std::stable_sort(stage.begin(), stage.end(),
                   [](const Cue& a, const Cue& b) {
                     return a.start_ms < b.start_ms;
                   });
  std::vector<Cue> out;
  for (Cue& cue : stage) {
    if (!out.empty() && out.back().text == cue.text) continue;
    out.push_back(std::move(cue));
  }
  track.cues = std::move(out);
  return track;
}

}  // namespace

TEST_CASE("parse_timestamp accepts both clock forms") {
  CHECK(vtt::parse_timestamp_ms("00:00:01.500") == 1500);
  CHECK(vtt::parse_timestamp_ms("01:02:03.450") == 3723450);
  CHECK(vtt::parse_timestamp_ms("02:03.450") == 123450);
  CHECK(vtt::parse_timestamp_ms("00:00.000") == 0);
  CHECK(vtt::parse_timestamp_ms("123:00:00.000") == 123LL * 3600000);
}

TEST_CASE("parse_timestamp rejects grammar violations") {
  for (const char* bad :
       {"1:2", "00:00", "00:60.000", "00:00:00.1", "00:00:00.1000", "",
        "0:00:00.000", "00:00:00,000", "-00:01.000", "00:0a.000", "00:00:00.",
        "11.000", "00:00:00:00.000", "00:00:00.000 "}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(vtt::parse_timestamp_ms(bad), BadTimestamp);
  }
  try {
    vtt::parse_timestamp_ms("1:2");
  } catch (const BadTimestamp& e) {
    CHECK(e.text() == "1:2");
  }
}

TEST_CASE("timestamp round-trip is exact over the full range") {
  std::mt19937 rng(7001);
  std::uniform_int_distribution<std::int64_t> dist(0, 359999999);
  for (int i = 0; i < 10000; ++i) {
    std::int64_t ms = dist(rng);
    CHECK(vtt::parse_timestamp_ms(testutil::format_timestamp(ms)) == ms);
  }
  CHECK(vtt::parse_timestamp_ms(testutil::format_timestamp(0)) == 0);
  CHECK(vtt::parse_timestamp_ms(testutil::format_timestamp(359999999)) ==
        359999999);
}

TEST_CASE("parse_vtt handles the minimal file") {
  auto track =
      vtt::parse_vtt("WEBVTT\n\n00:00:00.000 --> 00:00:01.500\nhello world\n",
                     "eng-us", SourceKind::AutomaticSpeech);
  REQUIRE(track.cues.size() == 1);
  CHECK(track.cues[0].start_ms == 0);
  CHECK(track.cues[0].end_ms == 1500);
  CHECK(track.cues[0].text == "hello world");
  CHECK(track.language == "eng-us");
  CHECK(track.warnings.empty());
}

TEST_CASE("parse_vtt empty track") {
  auto track = vtt::parse_vtt("WEBVTT\n", "", SourceKind::Unknown);
  CHECK(track.cues.empty());
  CHECK(track.warnings.empty());
}

TEST_CASE("parse_vtt requires the header") {
  CHECK_THROWS_AS(vtt::parse_vtt("00:00:00.000 --> 00:00:01.000\nhi\n", "",
                                 SourceKind::Unknown),
                  NotVtt);
  CHECK_THROWS_AS(vtt::parse_vtt("", "", SourceKind::Unknown), NotVtt);
  CHECK_THROWS_AS(vtt::parse_vtt("WEBVTTX\n", "", SourceKind::Unknown), NotVtt);
  // BOM and header decorations are fine.
  CHECK_NOTHROW(vtt::parse_vtt("\xEF\xBB\xBFWEBVTT\n", "", SourceKind::Unknown));
  CHECK_NOTHROW(
      vtt::parse_vtt("WEBVTT - some title\n", "", SourceKind::Unknown));
}

TEST_CASE("parse_vtt skips NOTE blocks between cues") {
  auto track = vtt::parse_vtt(
      "WEBVTT\n\n00:00.000 --> 00:01.000\none\n\nNOTE\nthis is a comment\n"
      "spanning lines\n\n00:02.000 --> 00:03.000\ntwo\n",
      "", SourceKind::Unknown);
  REQUIRE(track.cues.size() == 2);
  CHECK(track.cues[0].text == "one");
  CHECK(track.cues[1].text == "two");
  CHECK(vtt::track_text(track).find("comment") == std::string::npos);
}

TEST_CASE("parse_vtt skips STYLE and REGION, keeps identified cues") {
  auto track = vtt::parse_vtt(
      "WEBVTT\n\nSTYLE\n::cue { color: red }\n\nREGION\nid:r1\n\n"
      "intro-cue\n00:00.000 --> 00:01.000 align:start position:10%\n"
      "styled <b>text</b>\n",
      "", SourceKind::Unknown);
  REQUIRE(track.cues.size() == 1);
  CHECK(track.cues[0].text == "styled <b>text</b>");
}

TEST_CASE("parse_vtt joins multi-line payloads with a space") {
  auto track = vtt::parse_vtt(
      "WEBVTT\n\n00:00.000 --> 00:01.000\nline one\nline two\n", "",
      SourceKind::Unknown);
  REQUIRE(track.cues.size() == 1);
  CHECK(track.cues[0].text == "line one line two");
}

TEST_CASE("parse_vtt records warnings for malformed cue blocks") {
  auto track = vtt::parse_vtt(
      "WEBVTT\n\nbroken --> block\nwhatever\n\n00:02.000 --> 00:03.000\nok\n",
      "", SourceKind::Unknown);
  REQUIRE(track.cues.size() == 1);
  CHECK(track.cues[0].text == "ok");
  CHECK(track.warnings.size() == 1);
}

TEST_CASE("parse_vtt tolerates CRLF and replaces invalid UTF-8") {
  auto track = vtt::parse_vtt(
      "WEBVTT\r\n\r\n00:00.000 --> 00:01.000\r\nbad \xFF byte\r\n", "",
      SourceKind::Unknown);
  REQUIRE(track.cues.size() == 1);
  CHECK(track.cues[0].text == "bad \xEF\xBF\xBD byte");
  REQUIRE(track.warnings.size() == 1);
  CHECK(track.warnings[0].find("UTF-8") != std::string::npos);
}

TEST_CASE("serialize then parse reproduces cue lists exactly") {
  std::mt19937 rng(7002);
  for (int i = 0; i < 500; ++i) {
    auto cues = testutil::random_cues(rng);
    bool ids = i % 2 == 0;
    bool notes = i % 3 == 0;
    auto track = vtt::parse_vtt(testutil::serialize_track(cues, ids, notes),
                                "eng-us", SourceKind::AutomaticSpeech);
    CHECK(track.cues == cues);
    CHECK(track.warnings.empty());
  }
}

TEST_CASE("normalize drops rolling-caption duplicates") {
  auto track = make_track({{0, 1000, "hello"},
                           {1000, 2000, "hello"},
                           {2000, 3000, "world"}});
  auto out = vtt::normalize_track(std::move(track));
  REQUIRE(out.cues.size() == 2);
  CHECK(out.cues[0].text == "hello");
  CHECK(out.cues[1].text == "world");
}

TEST_CASE("normalize strips markup and collapses whitespace") {
  auto out = vtt::normalize_track(
      make_track({{0, 1000, "<c.yellow>hi</c> <00:00:01.000>there"}}));
  REQUIRE(out.cues.size() == 1);
  CHECK(out.cues[0].text == "hi there");

  out = vtt::normalize_track(make_track({{0, 1000, "  a\t\tb  "}}));
  CHECK(out.cues[0].text == "a b");
}

TEST_CASE("normalize drops empties and reversed cues, sorts by start") {
  auto out = vtt::normalize_track(make_track({{5000, 6000, "late"},
                                              {0, 1000, "<b></b>"},
                                              {3000, 1000, "reversed"},
                                              {1000, 2000, "early"}}));
  REQUIRE(out.cues.size() == 2);
  CHECK(out.cues[0].text == "early");
  CHECK(out.cues[1].text == "late");
  CHECK(out.warnings.size() == 1);  // the reversed cue
}

TEST_CASE("normalize matches the reference normalizer on random tracks") {
  std::mt19937 rng(7003);
  std::uniform_int_distribution<int> tag_kind(0, 5);
  for (int i = 0; i < 1000; ++i) {
    auto cues = testutil::random_cues(rng);
    // Inject rolling duplicates, markup, whitespace noise and reversed
    // spans.
    std::vector<Cue> noisy;
    for (auto& cue : cues) {
      noisy.push_back(cue);
      switch (tag_kind(rng)) {
        case 0: noisy.push_back(cue); break;  // duplicate
        case 1: noisy.back().text = "<v Ann>" + cue.text + "</v>"; break;
        case 2: noisy.back().text = "  " + cue.text + "\t"; break;
        case 3: noisy.back().text = "<00:00:01.000>" + cue.text; break;
        case 4:
          std::swap(noisy.back().start_ms, noisy.back().end_ms);
          break;
        default: break;
      }
    }
    auto expected = oracle_normalize(make_track(noisy));
    auto actual = vtt::normalize_track(make_track(noisy));
    CHECK(actual.cues == expected.cues);
  }
}

TEST_CASE("normalize is idempotent") {
  std::mt19937 rng(7004);
  for (int i = 0; i < 1000; ++i) {
    auto track = make_track(testutil::random_cues(rng));
    auto once = vtt::normalize_track(track);
    auto twice = vtt::normalize_track(once);
    CHECK(once.cues == twice.cues);
  }
}

TEST_CASE("normalized tracks satisfy the stated postconditions") {
  std::mt19937 rng(7005);
  for (int i = 0; i < 500; ++i) {
    auto out = vtt::normalize_track(make_track(testutil::random_cues(rng)));
    for (std::size_t k = 0; k < out.cues.size(); ++k) {
      CHECK(!out.cues[k].text.empty());
      CHECK(out.cues[k].end_ms >= out.cues[k].start_ms);
      if (k > 0) {
        CHECK(out.cues[k].start_ms >= out.cues[k - 1].start_ms);
        CHECK(out.cues[k].text != out.cues[k - 1].text);
      }
    }
  }
}

TEST_CASE("track_text joins cues and counts words consistently") {
  auto track = vtt::normalize_track(
      make_track({{0, 1000, "hello"}, {1000, 2000, "world"}}));
  CHECK(vtt::track_text(track) == "hello world");
  CHECK(vtt::track_text(CueTrack{}) == "");

  std::mt19937 rng(7006);
  for (int i = 0; i < 200; ++i) {
    auto t = vtt::normalize_track(make_track(testutil::random_cues(rng)));
    std::int64_t per_cue = 0;
    for (const auto& cue : t.cues) {
      std::istringstream words(cue.text);
      std::string w;
      while (words >> w) ++per_cue;
    }
    std::istringstream joined(vtt::track_text(t));
    std::int64_t total = 0;
    std::string w;
    while (joined >> w) ++total;
    CHECK(total == per_cue);
  }
}

TEST_CASE("parse_vtt never crashes on arbitrary bytes") {
  std::mt19937 rng(7007);
  std::uniform_int_distribution<int> length(0, 300);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> mode(0, 3);
  for (int i = 0; i < 2000; ++i) {
    std::string bytes;
    if (mode(rng) != 0) bytes = "WEBVTT\n";
    int n = length(rng);
    for (int k = 0; k < n; ++k)
      bytes.push_back(static_cast<char>(byte(rng)));
    try {
      auto track = vtt::parse_vtt(bytes, "", SourceKind::Unknown);
      (void)vtt::normalize_track(std::move(track));
    } catch (const NotVtt&) {
      // acceptable outcome
    }
  }
}

TEST_CASE("format_seconds prints millisecond precision") {
  CHECK(vtt::format_seconds(0) == "0.000");
  CHECK(vtt::format_seconds(1500) == "1.500");
  CHECK(vtt::format_seconds(123456) == "123.456");
  CHECK(vtt::format_seconds(7) == "0.007");
}
