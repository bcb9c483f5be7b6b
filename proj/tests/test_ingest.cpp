#include "subtext/ingest.hpp"

#include <doctest.h>

#include <random>
#include <unordered_set>

#include "test_util.hpp"

using namespace subtext;

namespace {

std::string ndjson_line(const nlohmann::json& item) { return item.dump(); }

}  // namespace

TEST_CASE("stream_ndjson yields one capture per valid line") {
  testutil::TempDir dir;
  auto path = dir.file("capture.ndjson");
  testutil::write_file(path, ndjson_line(testutil::make_item("1")) + "\n" +
                                 ndjson_line(testutil::make_item("2")) + "\n" +
                                 ndjson_line(testutil::make_item("3")) + "\n");
  NdjsonReader reader(path);
  int captures = 0;
  while (auto item = reader.next()) {
    CHECK(std::holds_alternative<RawCapture>(*item));
    ++captures;
  }
  CHECK(captures == 3);
  CHECK(reader.lines_total() == 3);
  CHECK(reader.lines_blank() == 0);
}

TEST_CASE("stream_ndjson on an empty file yields nothing") {
  testutil::TempDir dir;
  auto path = dir.file("empty.ndjson");
  testutil::write_file(path, "");
  NdjsonReader reader(path);
  CHECK(!reader.next().has_value());
  CHECK(reader.lines_total() == 0);
}

TEST_CASE("stream_ndjson reports malformed lines without aborting") {
  testutil::TempDir dir;
  auto path = dir.file("broken.ndjson");
  std::string lines = ndjson_line(testutil::make_item("1")) + "\n" +
                      ndjson_line(testutil::make_item("2")) + "\n" +
                      "{\"broken\n";
  testutil::write_file(path, lines);

  // Oracle: validate each line independently.
  std::vector<bool> valid;
  {
    std::istringstream in(lines);
    std::string line;
    while (std::getline(in, line))
      valid.push_back(nlohmann::json::accept(line));
  }

  NdjsonReader reader(path);
  int captures = 0;
  std::vector<ItemError> errors;
  while (auto item = reader.next()) {
    if (auto* error = std::get_if<ItemError>(&*item))
      errors.push_back(*error);
    else
      ++captures;
  }
  CHECK(captures == static_cast<int>(std::count(valid.begin(), valid.end(), true)));
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].kind == ItemErrorKind::MalformedJson);
  CHECK(errors[0].line_number == 3);
}

TEST_CASE("stream_ndjson accounts for every input line") {
  std::mt19937 rng(10001);
  std::uniform_int_distribution<int> kind(0, 4);
  testutil::TempDir dir;
  auto path = dir.file("mixed.ndjson");

  std::size_t expect_blank = 0, expect_valid = 0, expect_error = 0;
  std::ostringstream content;
  for (int i = 0; i < 500; ++i) {
    switch (kind(rng)) {
      case 0:
        content << "   \n";
        ++expect_blank;
        break;
      case 1:
        content << "{\"nope\n";
        ++expect_error;
        break;
      case 2:
        content << "[1,2,3]\n";  // valid JSON, wrong shape
        ++expect_error;
        break;
      default:
        content << ndjson_line(testutil::make_item(std::to_string(i))) << "\n";
        ++expect_valid;
    }
  }
  testutil::write_file(path, content.str());

  NdjsonReader reader(path);
  std::size_t captures = 0, errors = 0;
  while (auto item = reader.next()) {
    if (std::holds_alternative<RawCapture>(*item))
      ++captures;
    else
      ++errors;
  }
  CHECK(captures == expect_valid);
  CHECK(errors == expect_error);
  CHECK(reader.lines_blank() == expect_blank);
  CHECK(captures + errors + reader.lines_blank() == reader.lines_total());
  CHECK(reader.lines_total() == 500);
}

TEST_CASE("stream_ndjson tolerates a BOM on the first line") {
  testutil::TempDir dir;
  auto path = dir.file("bom.ndjson");
  testutil::write_file(path,
                       "\xEF\xBB\xBF" + ndjson_line(testutil::make_item("1")) +
                           "\n");
  NdjsonReader reader(path);
  auto item = reader.next();
  REQUIRE(item.has_value());
  CHECK(std::holds_alternative<RawCapture>(*item));
}

TEST_CASE("stream_ndjson throws FileUnreadable before any yield") {
  CHECK_THROWS_AS(NdjsonReader("/nonexistent/capture.ndjson"), FileUnreadable);
}

TEST_CASE("parse_post fills defaults for a minimal item") {
  RawCapture raw{1, nlohmann::json{{"id", "7123"}, {"desc", ""}}, "t.ndjson"};
  auto parsed = parse_post(raw);
  REQUIRE(std::holds_alternative<PostRecord>(parsed));
  const auto& post = std::get<PostRecord>(parsed);
  CHECK(post.id == "7123");
  CHECK(post.author == "");
  CHECK(post.hashtags.empty());
  CHECK(post.metrics == Metrics{});
  CHECK(!post.music.has_value());
  CHECK(post.subtitle_descriptors.empty());
  CHECK(post.created_at == 0);
}

TEST_CASE("parse_post lowercases and dedups hashtags in order") {
  RawCapture raw{
      1,
      nlohmann::json{{"id", "1"},
                     {"desc", "watch this #StoryTime #fyp #storytime"}},
      "t.ndjson"};
  auto post = std::get<PostRecord>(parse_post(raw));
  CHECK(post.hashtags == std::vector<std::string>{"storytime", "fyp"});
}

TEST_CASE("parse_post merges structured hashtag entries first") {
  auto item = testutil::make_item("1", "inline #beta tag");
  item["challenges"] = nlohmann::json::array(
      {nlohmann::json{{"title", "Alpha"}}, nlohmann::json{{"title", "beta"}}});
  item["textExtra"] =
      nlohmann::json::array({nlohmann::json{{"hashtagName", "gamma"}}});
  RawCapture raw{1, item, "t.ndjson"};
  auto post = std::get<PostRecord>(parse_post(raw));
  CHECK(post.hashtags == std::vector<std::string>{"alpha", "beta", "gamma"});
}

TEST_CASE("parse_post canonicalizes large integer ids to decimal strings") {
  RawCapture raw{1, nlohmann::json::parse(R"({"id": 7234567890123456789})"),
                 "t.ndjson"};
  auto post = std::get<PostRecord>(parse_post(raw));
  CHECK(post.id == "7234567890123456789");
}

TEST_CASE("parse_post reads items nested under payload or data roots") {
  auto inner = testutil::make_item("7999", "same post #tag");
  testutil::add_subtitle(inner, "eng-US", "https://cdn.example/x.vtt");

  RawCapture top{1, inner, "a.ndjson"};
  RawCapture under_data{2, nlohmann::json{{"data", inner}}, "a.ndjson"};
  RawCapture under_payload{3, nlohmann::json{{"payload", inner}}, "b.ndjson"};

  auto a = std::get<PostRecord>(parse_post(top));
  auto b = std::get<PostRecord>(parse_post(under_data));
  auto c = std::get<PostRecord>(parse_post(under_payload));

  for (const auto* post : {&b, &c}) {
    CHECK(post->id == a.id);
    CHECK(post->author == a.author);
    CHECK(post->description == a.description);
    CHECK(post->hashtags == a.hashtags);
    CHECK(post->created_at == a.created_at);
    CHECK(post->metrics == a.metrics);
    CHECK(post->music == a.music);
    CHECK(post->subtitle_descriptors == a.subtitle_descriptors);
  }
  CHECK(b.raw.line_number == 2);
  CHECK(c.raw.line_number == 3);
}

TEST_CASE("parse_post flags missing ids and alien shapes") {
  RawCapture no_id{1, nlohmann::json{{"desc", "x"}}, "t"};
  auto e1 = parse_post(no_id);
  REQUIRE(std::holds_alternative<ItemError>(e1));
  CHECK(std::get<ItemError>(e1).kind == ItemErrorKind::MissingId);

  RawCapture bad_root{2, nlohmann::json{{"data", "not an object"}}, "t"};
  auto e2 = parse_post(bad_root);
  REQUIRE(std::holds_alternative<ItemError>(e2));
  CHECK(std::get<ItemError>(e2).kind == ItemErrorKind::UnrecognizedShape);
}

TEST_CASE("parse_post is deterministic") {
  auto item = testutil::make_item("42", "text #A #b #a");
  testutil::add_subtitle(item, "eng-US", "https://cdn.example/x.vtt");
  RawCapture raw{1, item, "t"};
  auto first = std::get<PostRecord>(parse_post(raw));
  for (int i = 0; i < 10; ++i) {
    auto again = std::get<PostRecord>(parse_post(raw));
    CHECK(again.id == first.id);
    CHECK(again.hashtags == first.hashtags);
    CHECK(again.subtitle_descriptors == first.subtitle_descriptors);
  }
}

TEST_CASE("read_4cat_csv maps columns onto posts") {
  testutil::TempDir dir;
  auto path = dir.file("4cat.csv");
  testutil::write_file(path,
                       "id,author,body\n"
                       "101,alice,\"first #one\"\n"
                       "102,bob,second\n");
  auto result = read_4cat_csv(path, "q1");
  REQUIRE(result.posts.size() == 2);
  CHECK(result.posts[0].id == "101");
  CHECK(result.posts[0].description == "first #one");
  CHECK(result.posts[0].hashtags == std::vector<std::string>{"one"});
  CHECK(result.posts[0].query == "q1");
  CHECK(result.posts[1].author == "bob");
  CHECK(result.errors.empty());
}

TEST_CASE("read_4cat_csv requires an id column") {
  testutil::TempDir dir;
  auto path = dir.file("noid.csv");
  testutil::write_file(path, "author,body\nalice,x\n");
  CHECK_THROWS_AS(read_4cat_csv(path, ""), HeaderMissing);
  CHECK_THROWS_AS(read_4cat_csv(dir.file("missing.csv"), ""), FileUnreadable);
}

TEST_CASE("read_4cat_csv reports rows without ids as item errors") {
  testutil::TempDir dir;
  auto path = dir.file("gaps.csv");
  testutil::write_file(path, "id,body\n1,a\n,missing\n2,b\n");
  auto result = read_4cat_csv(path, "");
  CHECK(result.posts.size() == 2);
  REQUIRE(result.errors.size() == 1);
  CHECK(result.errors[0].kind == ItemErrorKind::MissingId);
}

TEST_CASE("read_4cat_csv reconstructs descriptors only when a url exists") {
  testutil::TempDir dir;
  auto path = dir.file("desc.csv");
  testutil::write_file(
      path,
      "id,body,subtitle_url,subtitle_language,subtitle_source\n"
      "1,a,https://cdn.example/a.vtt,eng-US,asr\n"
      "2,b,,eng-us,asr\n");
  auto result = read_4cat_csv(path, "");
  REQUIRE(result.posts.size() == 2);
  REQUIRE(result.posts[0].subtitle_descriptors.size() == 1);
  const auto& d = result.posts[0].subtitle_descriptors[0];
  CHECK(d.language == "eng-us");
  CHECK(d.source == SourceKind::AutomaticSpeech);
  CHECK(d.format == "webvtt");
  CHECK(result.posts[1].subtitle_descriptors.empty());
}

TEST_CASE("dedup_posts keeps first occurrences in order") {
  auto make = [](const char* id) {
    PostRecord post;
    post.id = id;
    return post;
  };
  SUBCASE("planted duplicate") {
    auto result = dedup_posts({make("a"), make("b"), make("a"), make("c")});
    REQUIRE(result.posts.size() == 3);
    CHECK(result.posts[0].id == "a");
    CHECK(result.posts[1].id == "b");
    CHECK(result.posts[2].id == "c");
    CHECK(result.dropped == 1);
  }
  SUBCASE("all unique is the identity") {
    auto result = dedup_posts({make("a"), make("b"), make("c")});
    CHECK(result.posts.size() == 3);
    CHECK(result.dropped == 0);
  }
}

TEST_CASE("dedup_posts matches a hash-set oracle on random input") {
  std::mt19937 rng(10002);
  std::uniform_int_distribution<int> id(0, 399);
  std::vector<PostRecord> posts;
  for (int i = 0; i < 1000; ++i) {
    PostRecord post;
    post.id = std::to_string(id(rng));
    posts.push_back(std::move(post));
  }
  std::unordered_set<std::string> distinct;
  for (const auto& post : posts) distinct.insert(post.id);

  auto result = dedup_posts(posts);
  CHECK(result.posts.size() == distinct.size());
  CHECK(result.dropped == posts.size() - distinct.size());

  // output ids are unique and form a subsequence of the input
  std::unordered_set<std::string> seen;
  for (const auto& post : result.posts) CHECK(seen.insert(post.id).second);
  std::size_t cursor = 0;
  for (const auto& post : posts) {
    if (cursor < result.posts.size() && result.posts[cursor].id == post.id)
      ++cursor;
  }
  CHECK(cursor == result.posts.size());
}

TEST_CASE("read_ndjson tags every post with the collection query") {
  testutil::TempDir dir;
  auto path = dir.file("tagged.ndjson");
  testutil::write_file(path, ndjson_line(testutil::make_item("1")) + "\n\n" +
                                 ndjson_line(testutil::make_item("2")) + "\n");
  auto result = read_ndjson(path, "storytime");
  REQUIRE(result.posts.size() == 2);
  CHECK(result.posts[0].query == "storytime");
  CHECK(result.posts[1].query == "storytime");
  CHECK(result.lines_total == 3);
  CHECK(result.lines_blank == 1);
}
