#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "polarimeter/types.hpp"

namespace polarimeter::ingest {

struct Tweet {
    std::string tweet_id;
    std::string author_id;
    std::string author_handle;
    std::string text;
    std::int64_t created_at = 0;  // seconds since the Unix epoch, UTC
    std::optional<std::string> retweet_of_tweet_id;
    std::optional<std::string> retweet_of_user_handle;
    std::vector<std::string> hashtags;
    std::vector<std::string> urls;

    bool is_retweet() const { return retweet_of_tweet_id.has_value(); }
};

/// Recoverable per-line failure. Ingestion records it and moves on.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Recoverable failure to canonicalize a URL; the occurrence is dropped and tallied.
class UrlError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses one line of the corpus. Unknown fields are ignored.
/// Throws ParseError on malformed JSON, a missing or mistyped required field, a half-present
/// retweet pair, or an unparsable created_at.
Tweet parse_tweet_line(std::string_view line, std::size_t line_number = 0);

/// Serializes a tweet back to the corpus line format (no trailing newline).
std::string to_json_line(const Tweet& tweet);

/// RFC 3339 timestamp ("2018-09-28T12:00:00Z", offsets and fractional seconds accepted).
std::optional<std::int64_t> parse_rfc3339(std::string_view text);
std::string format_rfc3339(std::int64_t seconds);
/// UTC calendar date "YYYY-MM-DD".
std::string format_date(std::int64_t seconds);

/// The topical keyword list used for the Kavanaugh confirmation collection.
const std::vector<std::string>& default_keywords();

/// Case-insensitive substring matcher over a fixed keyword set.
class KeywordFilter {
public:
    explicit KeywordFilter(const std::vector<std::string>& keywords);
    bool matches(std::string_view text) const;

private:
    std::vector<std::string> folded_;
};

bool keyword_filter(const Tweet& tweet, const std::vector<std::string>& keywords);

/// Canonical website key: scheme, credentials, port and leading "www." removed; host only,
/// except twitter.com which keeps its first path segment ("twitter.com/thehill/").
/// Shortener hosts are not expanded. Throws UrlError for anything that is not an absolute
/// http(s) URL with a host.
ElementKey normalize_url(std::string_view url);

/// '#'-stripped, casefolded hashtag; nullopt when nothing usable remains.
std::optional<std::string> normalize_hashtag(std::string_view raw);
/// '@'-stripped, casefolded handle; nullopt when nothing usable remains.
std::optional<std::string> normalize_handle(std::string_view raw);

/// One occurrence per hashtag, per canonicalizable URL, and one retweeted-account occurrence
/// for retweets. Unusable URLs are skipped and counted into dropped_urls when given.
std::vector<ElementKey> extract_elements(const Tweet& tweet, std::size_t* dropped_urls = nullptr);

struct IngestOptions {
    std::vector<std::string> keywords = default_keywords();
    bool apply_keyword_filter = true;
    std::optional<std::int64_t> since;  // inclusive
    std::optional<std::int64_t> until;  // exclusive
};

struct IngestStats {
    std::size_t total_lines = 0;
    std::size_t parsed_lines = 0;
    std::size_t skipped_lines = 0;
    std::size_t duplicate_tweets = 0;
    std::size_t filtered_out = 0;
    std::size_t out_of_range = 0;
    std::vector<ParseError> errors;  // first few, for diagnostics

    static constexpr std::size_t kMaxRecordedErrors = 20;
};

struct Corpus {
    std::vector<Tweet> tweets;  // deduplicated, filtered, input order
    IngestStats stats;
};

Corpus ingest_stream(std::istream& in, const IngestOptions& options = {});
Corpus ingest_file(const std::filesystem::path& path, const IngestOptions& options = {});

}  // namespace polarimeter::ingest
