#include "polarimeter/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <unordered_set>

#include <json.hpp>

#include "polarimeter/parallel.hpp"

namespace polarimeter::ingest {

using nlohmann::json;

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

bool is_key_char(unsigned char c) { return c > 0x20 && c != 0x7f; }

bool usable_key(std::string_view key) {
    return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
        return is_key_char(static_cast<unsigned char>(c));
    });
}

std::string required_id(const json& obj, const char* field, std::size_t line) {
    auto it = obj.find(field);
    if (it == obj.end() || it->is_null()) throw ParseError(line, std::string("missing field '") + field + "'");
    if (it->is_string()) {
        auto s = it->get<std::string>();
        if (s.empty()) throw ParseError(line, std::string("empty field '") + field + "'");
        return s;
    }
    if (it->is_number_unsigned()) return std::to_string(it->get<std::uint64_t>());
    if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
    throw ParseError(line, std::string("field '") + field + "' must be a string or integer");
}

std::string required_string(const json& obj, const char* field, std::size_t line) {
    auto it = obj.find(field);
    if (it == obj.end() || it->is_null()) throw ParseError(line, std::string("missing field '") + field + "'");
    if (!it->is_string()) throw ParseError(line, std::string("field '") + field + "' must be a string");
    return it->get<std::string>();
}

std::vector<std::string> string_array(const json& obj, const char* field, std::size_t line) {
    std::vector<std::string> out;
    auto it = obj.find(field);
    if (it == obj.end() || it->is_null()) return out;
    if (!it->is_array()) throw ParseError(line, std::string("field '") + field + "' must be an array");
    out.reserve(it->size());
    for (const auto& v : *it) {
        if (!v.is_string()) throw ParseError(line, std::string("field '") + field + "' must hold strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

int parse_digits(std::string_view s, std::size_t pos, std::size_t count, bool& ok) {
    int v = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (pos + i >= s.size()) {
            ok = false;
            return 0;
        }
        const char c = s[pos + i];
        if (c < '0' || c > '9') {
            ok = false;
            return 0;
        }
        v = v * 10 + (c - '0');
    }
    return v;
}

}  // namespace

std::optional<std::int64_t> parse_rfc3339(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SS[.frac](Z|±HH:MM)
    if (s.size() < 20) return std::nullopt;
    bool ok = true;
    const int year = parse_digits(s, 0, 4, ok);
    const int month = parse_digits(s, 5, 2, ok);
    const int day = parse_digits(s, 8, 2, ok);
    const int hour = parse_digits(s, 11, 2, ok);
    const int minute = parse_digits(s, 14, 2, ok);
    const int second = parse_digits(s, 17, 2, ok);
    if (!ok || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':')
        return std::nullopt;
    if (hour > 23 || minute > 59 || second > 60) return std::nullopt;

    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                             std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok()) return std::nullopt;

    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        const std::size_t start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == start) return std::nullopt;
    }
    if (pos >= s.size()) return std::nullopt;
    std::int64_t offset = 0;
    if (s[pos] == 'Z' || s[pos] == 'z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '-' ? -1 : 1;
        const int oh = parse_digits(s, pos + 1, 2, ok);
        const int om = parse_digits(s, pos + 4, 2, ok);
        if (!ok || pos + 3 >= s.size() || s[pos + 3] != ':' || oh > 23 || om > 59) return std::nullopt;
        offset = sign * (oh * 3600 + om * 60);
        pos += 6;
    } else {
        return std::nullopt;
    }
    if (pos != s.size()) return std::nullopt;

    const std::int64_t days_since_epoch = sys_days{ymd}.time_since_epoch().count();
    return days_since_epoch * 86400 + hour * 3600 + minute * 60 + second - offset;
}

std::string format_date(std::int64_t seconds) {
    using namespace std::chrono;
    const auto d = floor<days>(sys_seconds{std::chrono::seconds{seconds}});
    const year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_rfc3339(std::int64_t seconds) {
    std::int64_t rem = seconds % 86400;
    if (rem < 0) rem += 86400;
    char buf[16];
    std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(rem / 3600),
                  static_cast<int>(rem % 3600 / 60), static_cast<int>(rem % 60));
    return format_date(seconds) + buf;
}

Tweet parse_tweet_line(std::string_view line, std::size_t line_number) {
    json obj;
    try {
        obj = json::parse(line.begin(), line.end());
    } catch (const json::parse_error& e) {
        throw ParseError(line_number, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_number, "line is not a JSON object");

    Tweet t;
    t.tweet_id = required_id(obj, "id", line_number);
    t.author_id = required_id(obj, "user_id", line_number);
    t.author_handle = required_string(obj, "user_screen_name", line_number);
    for (const auto* field : {&t.tweet_id, &t.author_id, &t.author_handle})
        if (!usable_key(*field)) throw ParseError(line_number, "identifier fields must be nonempty without whitespace");
    t.text = required_string(obj, "text", line_number);
    const auto created = required_string(obj, "created_at", line_number);
    const auto ts = parse_rfc3339(created);
    if (!ts) throw ParseError(line_number, "created_at is not an RFC 3339 timestamp: " + created);
    t.created_at = *ts;

    const bool has_rt_id = obj.contains("retweeted_status_id") && !obj["retweeted_status_id"].is_null();
    const bool has_rt_user =
        obj.contains("retweeted_user_screen_name") && !obj["retweeted_user_screen_name"].is_null();
    if (has_rt_id != has_rt_user)
        throw ParseError(line_number, "retweeted_status_id and retweeted_user_screen_name must appear together");
    if (has_rt_id) {
        t.retweet_of_tweet_id = required_id(obj, "retweeted_status_id", line_number);
        t.retweet_of_user_handle = required_string(obj, "retweeted_user_screen_name", line_number);
        if (!usable_key(*t.retweet_of_tweet_id))
            throw ParseError(line_number, "retweeted_status_id must be nonempty without whitespace");
    }
    t.hashtags = string_array(obj, "hashtags", line_number);
    t.urls = string_array(obj, "urls", line_number);
    return t;
}

std::string to_json_line(const Tweet& t) {
    json obj = json::object();
    obj["id"] = t.tweet_id;
    obj["user_id"] = t.author_id;
    obj["user_screen_name"] = t.author_handle;
    obj["text"] = t.text;
    obj["created_at"] = format_rfc3339(t.created_at);
    if (t.retweet_of_tweet_id) {
        obj["retweeted_status_id"] = *t.retweet_of_tweet_id;
        obj["retweeted_user_screen_name"] = t.retweet_of_user_handle.value_or("");
    }
    obj["hashtags"] = t.hashtags;
    obj["urls"] = t.urls;
    return obj.dump();
}

const std::vector<std::string>& default_keywords() {
    static const std::vector<std::string> keywords = {
        "Kavanaugh", "Ford",     "Supreme",    "judiciary", "Blasey",    "Grassley", "Hatch",
        "Graham",    "Cornyn",   "Lee",        "Cruz",      "Sasse",     "Flake",    "Crapo",
        "Tillis",    "Kennedy",  "Feinstein",  "Leahy",     "Durbin",    "Whitehouse",
        "Klobuchar", "Coons",    "Blumenthal", "Hirono",    "Booker",    "Harris"};
    return keywords;
}

KeywordFilter::KeywordFilter(const std::vector<std::string>& keywords) {
    if (keywords.empty()) throw std::invalid_argument("keyword set must be nonempty");
    folded_.reserve(keywords.size());
    for (const auto& k : keywords) {
        if (k.empty()) throw std::invalid_argument("keywords must be nonempty strings");
        folded_.push_back(casefold(k));
    }
}

bool KeywordFilter::matches(std::string_view text) const {
    const std::string folded = casefold(text);
    return std::any_of(folded_.begin(), folded_.end(),
                       [&](const std::string& k) { return folded.find(k) != std::string::npos; });
}

bool keyword_filter(const Tweet& tweet, const std::vector<std::string>& keywords) {
    return KeywordFilter(keywords).matches(tweet.text);
}

ElementKey normalize_url(std::string_view url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos) throw UrlError("not an absolute URL: " + std::string(url));
    const std::string scheme = casefold(url.substr(0, scheme_end));
    if (scheme != "http" && scheme != "https") throw UrlError("unsupported scheme: " + std::string(url));

    std::string_view rest = url.substr(scheme_end + 3);
    const auto authority_end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, authority_end);
    std::string_view path = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);

    if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);
    std::string_view host_view;
    if (!authority.empty() && authority.front() == '[') {
        const auto close = authority.find(']');
        if (close == std::string_view::npos) throw UrlError("bad IPv6 host: " + std::string(url));
        host_view = authority.substr(0, close + 1);
    } else {
        host_view = authority.substr(0, authority.find(':'));
    }

    std::string host = casefold(host_view);
    while (!host.empty() && host.back() == '.') host.pop_back();
    if (host.rfind("www.", 0) == 0) host.erase(0, 4);
    if (host.empty()) throw UrlError("URL has no host: " + std::string(url));
    for (unsigned char c : host) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' ||
                        c == '_' || c == '[' || c == ']' || c == ':' || c >= 0x80;
        if (!ok) throw UrlError("invalid host in URL: " + std::string(url));
    }

    if (host == "twitter.com" && path.size() > 1 && path.front() == '/') {
        const std::string_view seg = path.substr(1, path.find_first_of("/?#", 1) - 1);
        if (!seg.empty() && usable_key(seg)) return {ElementKind::Website, host + "/" + casefold(seg) + "/"};
    }
    return {ElementKind::Website, host};
}

std::optional<std::string> normalize_hashtag(std::string_view raw) {
    while (!raw.empty() && raw.front() == '#') raw.remove_prefix(1);
    if (!usable_key(raw)) return std::nullopt;
    return casefold(raw);
}

std::optional<std::string> normalize_handle(std::string_view raw) {
    while (!raw.empty() && raw.front() == '@') raw.remove_prefix(1);
    if (!usable_key(raw)) return std::nullopt;
    return casefold(raw);
}

std::vector<ElementKey> extract_elements(const Tweet& tweet, std::size_t* dropped_urls) {
    std::vector<ElementKey> out;
    out.reserve(tweet.hashtags.size() + tweet.urls.size() + 1);
    for (const auto& h : tweet.hashtags)
        if (auto key = normalize_hashtag(h)) out.push_back({ElementKind::Hashtag, std::move(*key)});
    for (const auto& u : tweet.urls) {
        try {
            out.push_back(normalize_url(u));
        } catch (const UrlError&) {
            if (dropped_urls) ++*dropped_urls;
        }
    }
    if (tweet.retweet_of_user_handle)
        if (auto key = normalize_handle(*tweet.retweet_of_user_handle))
            out.push_back({ElementKind::RetweetedAccount, std::move(*key)});
    return out;
}

namespace {

constexpr std::size_t kBlockLines = 1 << 15;

struct LineOutcome {
    std::optional<Tweet> tweet;
    std::optional<ParseError> error;
};

void consume_block(std::vector<std::string>& lines, std::size_t first_line_number, const IngestOptions& options,
                   const KeywordFilter* filter, std::unordered_set<std::string>& seen, Corpus& corpus) {
    std::vector<LineOutcome> outcomes(lines.size());
    parallel_for(lines.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                outcomes[i].tweet = parse_tweet_line(lines[i], first_line_number + i);
            } catch (const ParseError& e) {
                outcomes[i].error = e;
            }
        }
    });

    auto& stats = corpus.stats;
    for (auto& o : outcomes) {
        ++stats.total_lines;
        if (!o.tweet) {
            ++stats.skipped_lines;
            if (stats.errors.size() < IngestStats::kMaxRecordedErrors) stats.errors.push_back(*o.error);
            continue;
        }
        ++stats.parsed_lines;
        Tweet& t = *o.tweet;
        if ((options.since && t.created_at < *options.since) || (options.until && t.created_at >= *options.until)) {
            ++stats.out_of_range;
            continue;
        }
        if (filter && !filter->matches(t.text)) {
            ++stats.filtered_out;
            continue;
        }
        if (!seen.insert(t.tweet_id).second) {
            ++stats.duplicate_tweets;
            continue;
        }
        corpus.tweets.push_back(std::move(t));
    }
    lines.clear();
}

}  // namespace

Corpus ingest_stream(std::istream& in, const IngestOptions& options) {
    std::optional<KeywordFilter> filter;
    if (options.apply_keyword_filter) filter.emplace(options.keywords);

    Corpus corpus;
    std::unordered_set<std::string> seen;
    std::vector<std::string> block;
    block.reserve(kBlockLines);
    std::size_t next_line = 1;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        block.push_back(std::move(line));
        if (block.size() == kBlockLines) {
            consume_block(block, next_line, options, filter ? &*filter : nullptr, seen, corpus);
            next_line += kBlockLines;
        }
    }
    if (!block.empty()) consume_block(block, next_line, options, filter ? &*filter : nullptr, seen, corpus);
    return corpus;
}

Corpus ingest_file(const std::filesystem::path& path, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus " + path.string());
    return ingest_stream(in, options);
}

}  // namespace polarimeter::ingest
