#include <doctest.h>

#include <algorithm>
#include <random>
#include <regex>
#include <sstream>

#include "helpers.hpp"
#include "polarimeter/ingest.hpp"

using namespace polarimeter;
using namespace polarimeter::ingest;

namespace {

const char* kFullLine =
    R"({"id":"11","user_id":"7","user_screen_name":"Alice","text":"RT @FoxNews: Kavanaugh hearing",)"
    R"("created_at":"2018-09-28T14:03:00Z","retweeted_status_id":"5","retweeted_user_screen_name":"FoxNews",)"
    R"("hashtags":["#MAGA","Kavanaugh"],"urls":["https://www.foxnews.com/politics/x"],"lang":"en"})";

// Host extraction with the generic-syntax regular expression of RFC 3986, appendix B.
std::string oracle_host(const std::string& url) {
    static const std::regex generic(R"(^(([^:/?#]+):)?(//([^/?#]*))?([^?#]*)(\?([^#]*))?(#(.*))?)");
    std::smatch m;
    REQUIRE(std::regex_match(url, m, generic));
    std::string authority = m[4].str();
    if (const auto at = authority.rfind('@'); at != std::string::npos) authority = authority.substr(at + 1);
    std::string host = authority.substr(0, authority.find(':'));
    for (auto& c : host) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (host.rfind("www.", 0) == 0) host = host.substr(4);
    return host;
}

std::string jsonl(std::initializer_list<Tweet> tweets) {
    std::string out;
    for (const auto& t : tweets) out += to_json_line(t) + "\n";
    return out;
}

}  // namespace

TEST_CASE("a complete record maps every field") {
    const Tweet t = parse_tweet_line(kFullLine, 1);
    CHECK(t.tweet_id == "11");
    CHECK(t.author_id == "7");
    CHECK(t.author_handle == "Alice");
    CHECK(t.text == "RT @FoxNews: Kavanaugh hearing");
    CHECK(format_rfc3339(t.created_at) == "2018-09-28T14:03:00Z");
    CHECK(t.retweet_of_tweet_id == "5");
    CHECK(t.retweet_of_user_handle == "FoxNews");
    CHECK(t.hashtags == std::vector<std::string>{"#MAGA", "Kavanaugh"});
    CHECK(t.urls == std::vector<std::string>{"https://www.foxnews.com/politics/x"});
}

TEST_CASE("a record without retweet fields is an original") {
    const Tweet t = parse_tweet_line(
        R"({"id":12,"user_id":8,"user_screen_name":"bob","text":"hi","created_at":"2018-09-29T00:00:00+02:00"})");
    CHECK(t.tweet_id == "12");
    CHECK(t.author_id == "8");
    CHECK_FALSE(t.is_retweet());
    CHECK_FALSE(t.retweet_of_user_handle);
    CHECK(t.hashtags.empty());
    CHECK(format_rfc3339(t.created_at) == "2018-09-28T22:00:00Z");
}

TEST_CASE("malformed records raise a parse error carrying the line number") {
    const std::string truncated = std::string(kFullLine).substr(0, 60);
    try {
        parse_tweet_line(truncated, 42);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 42);
    }
    CHECK_THROWS_AS(parse_tweet_line(R"({"id":"1","user_id":"2","text":"x","created_at":"2018-09-28T00:00:00Z"})"),
                    ParseError);
    CHECK_THROWS_AS(parse_tweet_line(R"({"id":"1","user_id":"2","user_screen_name":"a","text":"x",)"
                                     R"("created_at":"yesterday"})"),
                    ParseError);
    CHECK_THROWS_AS(parse_tweet_line(R"({"id":"1","user_id":"2","user_screen_name":"a","text":"x",)"
                                     R"("created_at":"2018-09-28T00:00:00Z","retweeted_status_id":"9"})"),
                    ParseError);
    CHECK_THROWS_AS(parse_tweet_line(R"({"id":"","user_id":"2","user_screen_name":"a","text":"x",)"
                                     R"("created_at":"2018-09-28T00:00:00Z"})"),
                    ParseError);
    CHECK_THROWS_AS(parse_tweet_line(R"({"id":"1","user_id":"2","user_screen_name":"a","text":"x",)"
                                     R"("created_at":"2018-09-28T00:00:00Z","hashtags":"#a"})"),
                    ParseError);
    CHECK_THROWS_AS(parse_tweet_line("[1,2,3]"), ParseError);
}

TEST_CASE("records survive a serialization round trip") {
    const Tweet t = parse_tweet_line(kFullLine);
    const Tweet u = parse_tweet_line(to_json_line(t));
    CHECK(u.tweet_id == t.tweet_id);
    CHECK(u.created_at == t.created_at);
    CHECK(u.retweet_of_tweet_id == t.retweet_of_tweet_id);
    CHECK(u.hashtags == t.hashtags);
    CHECK(u.urls == t.urls);
}

TEST_CASE("RFC 3339 timestamps") {
    CHECK(parse_rfc3339("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_rfc3339("2018-09-28T00:00:00Z") == 1538092800);
    CHECK(parse_rfc3339("2018-09-28T00:00:00.999Z") == 1538092800);
    CHECK(parse_rfc3339("2018-09-28T05:30:00+05:30") == 1538092800);
    CHECK(parse_rfc3339("2018-09-27T19:00:00-05:00") == 1538092800);
    CHECK_FALSE(parse_rfc3339("2018-02-30T00:00:00Z"));
    CHECK_FALSE(parse_rfc3339("2018-09-28 00:00:00"));
    CHECK_FALSE(parse_rfc3339("2018-09-28T25:00:00Z"));
    CHECK(format_date(1538092800 + 86399) == "2018-09-28");
    CHECK(format_date(1538092800 + 86400) == "2018-09-29");
}

TEST_CASE("keyword filter") {
    const auto& kw = default_keywords();
    CHECK(kw.size() == 26);
    Tweet t = testing::tweet("1", "u");
    t.text = "Kavanaugh confirmed today";
    CHECK(keyword_filter(t, kw));
    t.text = "hello world";
    CHECK_FALSE(keyword_filter(t, kw));
    t.text = "kavanaugh";
    CHECK(keyword_filter(t, kw));
    CHECK_THROWS_AS(KeywordFilter({}), std::invalid_argument);
}

TEST_CASE("keyword filter matches the casefold-substring oracle") {
    const std::vector<std::string> kw = {"Kavanaugh", "Ford", "Blasey"};
    const KeywordFilter filter(kw);
    const std::vector<std::string> pieces = {"KAVANAUGH", "kAvAnAuGh", "fOrD", "blasey", "Blas", "ey", "kava",
                                             "naugh", " ", "x", "Fo", "rd", "Ünïcode"};
    std::mt19937 rng(5);
    for (int trial = 0; trial < 2000; ++trial) {
        std::string text;
        const int n = static_cast<int>(rng() % 5);
        for (int i = 0; i < n; ++i) text += pieces[rng() % pieces.size()];
        std::string lower = text;
        std::transform(lower.begin(), lower.end(), lower.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        const bool expected = lower.find("kavanaugh") != std::string::npos ||
                              lower.find("ford") != std::string::npos || lower.find("blasey") != std::string::npos;
        CHECK(filter.matches(text) == expected);
    }
}

TEST_CASE("normalize_url canonical shapes") {
    CHECK(normalize_url("https://www.washingtonpost.com/politics/x").key == "washingtonpost.com");
    CHECK(normalize_url("https://twitter.com/thehill/status/123").key == "twitter.com/thehill/");
    CHECK(normalize_url("http://wapo.st/2x").key == "wapo.st");
    CHECK(normalize_url("https://twitter.com/TheHill").key == "twitter.com/thehill/");
    CHECK(normalize_url("https://www.twitter.com/").key == "twitter.com");
    CHECK(normalize_url("HTTPS://User:pw@WWW.Example.COM:8443/a?b#c").key == "example.com");
    CHECK(normalize_url("http://hill.cm").key == "hill.cm");
    CHECK(normalize_url("http://hill.cm").kind == ElementKind::Website);
}

TEST_CASE("normalize_url rejects unusable URLs") {
    CHECK_THROWS_AS(normalize_url("ftp://example.com/a"), UrlError);
    CHECK_THROWS_AS(normalize_url("example.com/a"), UrlError);
    CHECK_THROWS_AS(normalize_url("https:///path"), UrlError);
    CHECK_THROWS_AS(normalize_url("https://exa mple.com/"), UrlError);
    CHECK_THROWS_AS(normalize_url("https://:80/"), UrlError);
}

TEST_CASE("normalize_url agrees with the RFC 3986 reference parse on non-twitter hosts") {
    const std::vector<std::string> urls = {
        "https://www.washingtonpost.com/politics/x",
        "http://wapo.st/2x",
        "https://thegatewaypundit.com/2018/10/a-b-c/?utm=1",
        "http://user@www.nytimes.com:80/section#frag",
        "https://WWW.CNN.com",
        "https://foxnews.com?x=1",
        "http://sub.domain.example.org/a/b/c",
        "https://www.breitbart.com/politics/2018/10/06/x/",
        "http://localhost:8080/",
        "https://a-b.c-d.e/f",
    };
    for (const auto& url : urls) {
        CAPTURE(url);
        CHECK(normalize_url(url).key == oracle_host(url));
    }
}

TEST_CASE("normalization is idempotent") {
    for (const std::string url : {"https://www.washingtonpost.com/politics/x", "https://twitter.com/TheHill/status/1",
                                  "http://wapo.st/2x", "https://a.b.c:9/x"}) {
        const auto key = normalize_url(url).key;
        CHECK(normalize_url("https://" + key).key == key);
    }
    for (const std::string tag : {"#MAGA", "maga", "##Kavanaugh"}) {
        const auto key = *normalize_hashtag(tag);
        CHECK(normalize_hashtag(key) == key);
    }
    CHECK(normalize_handle("@FoxNews") == "foxnews");
    CHECK(normalize_handle(*normalize_handle("@FoxNews")) == "foxnews");
    CHECK_FALSE(normalize_hashtag("#"));
    CHECK_FALSE(normalize_handle("@"));
}

TEST_CASE("extract_elements") {
    SUBCASE("case variants of one hashtag are two occurrences of one key") {
        const auto elements = extract_elements(testing::tweet("1", "u", {"#MAGA", "#maga"}));
        // brute-force recount
        std::size_t maga = 0;
        for (const auto& e : elements) maga += e.kind == ElementKind::Hashtag && e.key == "maga";
        CHECK(elements.size() == 2);
        CHECK(maga == 2);
    }
    SUBCASE("a plain original has no elements") { CHECK(extract_elements(testing::tweet("1", "u")).empty()); }
    SUBCASE("a retweet yields one account occurrence") {
        const auto elements = extract_elements(testing::retweet("1", "u", "9", "@FoxNews"));
        REQUIRE(elements.size() == 1);
        CHECK(elements[0] == ElementKey{ElementKind::RetweetedAccount, "foxnews"});
    }
    SUBCASE("bad URLs are dropped and tallied") {
        std::size_t dropped = 0;
        const auto elements =
            extract_elements(testing::tweet("1", "u", {}, {"ftp://x.org", "https://cnn.com/a", "nope"}), &dropped);
        CHECK(dropped == 2);
        REQUIRE(elements.size() == 1);
        CHECK(elements[0].key == "cnn.com");
    }
}

TEST_CASE("ingest counts, deduplicates and filters") {
    auto a = testing::tweet("1", "u1");
    auto b = testing::tweet("2", "u2");
    b.text = "nothing relevant";
    auto c = testing::tweet("3", "u3");
    c.created_at += 3 * 86400;
    std::string text = jsonl({a, b, c, a});
    text += "{not json\n\n";
    std::istringstream in(text);
    const Corpus corpus = ingest_stream(in);
    CHECK(corpus.stats.total_lines == 6);
    CHECK(corpus.stats.skipped_lines == 2);
    CHECK(corpus.stats.parsed_lines + corpus.stats.skipped_lines == corpus.stats.total_lines);
    CHECK(corpus.stats.duplicate_tweets == 1);
    CHECK(corpus.stats.filtered_out == 1);
    REQUIRE(corpus.tweets.size() == 2);
    CHECK(corpus.tweets[0].tweet_id == "1");
    CHECK(corpus.tweets[1].tweet_id == "3");
    REQUIRE_FALSE(corpus.stats.errors.empty());
    CHECK(corpus.stats.errors[0].line() == 5);

    IngestOptions windowed;
    windowed.since = parse_rfc3339("2018-09-28T00:00:00Z");
    windowed.until = parse_rfc3339("2018-09-29T00:00:00Z");
    std::istringstream again(text);
    const Corpus w = ingest_stream(again, windowed);
    CHECK(w.tweets.size() == 1);
    CHECK(w.stats.out_of_range == 1);

    IngestOptions unfiltered;
    unfiltered.apply_keyword_filter = false;
    std::istringstream third(text);
    CHECK(ingest_stream(third, unfiltered).tweets.size() == 3);
}

TEST_CASE("parsing large inputs gives the same result as parsing line by line") {
    std::string text;
    for (int i = 0; i < 70000; ++i) {
        auto t = testing::tweet(std::to_string(i % 50000), "u" + std::to_string(i % 97), {"#t" + std::to_string(i % 7)});
        if (i % 1000 == 999) {
            text += "garbage\n";
            continue;
        }
        text += to_json_line(t) + "\n";
    }
    std::istringstream in(text);
    const Corpus corpus = ingest_stream(in);
    CHECK(corpus.stats.total_lines == 70000);
    CHECK(corpus.stats.skipped_lines == 70);
    CHECK(corpus.stats.errors.size() == IngestStats::kMaxRecordedErrors);
    std::vector<std::string> ids;
    for (const auto& t : corpus.tweets) ids.push_back(t.tweet_id);
    // first occurrence wins and input order is kept; garbage lines in the first 50k shift nothing
    std::vector<std::string> expected;
    for (int i = 0; i < 50000; ++i)
        if (i % 1000 != 999) expected.push_back(std::to_string(i));
    for (int i = 50000; i < 70000; ++i)
        if (i % 1000 != 999 && (i % 50000) % 1000 == 999) expected.push_back(std::to_string(i % 50000));
    CHECK(ids == expected);
}
