#include "polarimeter/graph.hpp"

#include <charconv>
#include <stdexcept>
#include <unordered_map>

#include "polarimeter/tsv.hpp"

namespace polarimeter::graph {

namespace fs = std::filesystem;

std::size_t UserProfile::distinct_elements(ElementKind kind) const {
    std::size_t n = 0;
    for (const auto& [key, count] : element_counts)
        if (key.kind == kind) ++n;
    return n;
}

std::uint64_t UserProfile::element_total(ElementKind kind) const {
    std::uint64_t n = 0;
    for (const auto& [key, count] : element_counts)
        if (key.kind == kind) n += count;
    return n;
}

namespace {

using VariantCounts = std::map<std::string, std::uint64_t>;

/// Most frequent entry, ties broken by the lexicographically smallest string.
std::string most_frequent(const VariantCounts& counts) {
    std::string best;
    std::uint64_t best_count = 0;
    for (const auto& [text, count] : counts) {
        if (count > best_count) {
            best = text;
            best_count = count;
        }
    }
    return best;
}

std::string strip_prefix(std::string_view raw, char c) {
    while (!raw.empty() && raw.front() == c) raw.remove_prefix(1);
    return std::string(raw);
}

constexpr std::string_view kProfilesMagic = "#polarimeter-profiles\tv1";
constexpr std::string_view kRetweetedMagic = "#polarimeter-retweeted\tv1";
constexpr std::string_view kAudienceMagic = "#polarimeter-audience\tv1";
constexpr std::string_view kDisplayMagic = "#polarimeter-display\tv1";

std::uint64_t parse_count(std::string_view text, const std::string& where) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::runtime_error("bad count '" + std::string(text) + "' in " + where);
    return v;
}

std::vector<std::string> lines_after_header(const fs::path& path, std::string_view magic) {
    auto lines = tsv::read_lines(path);
    if (lines.size() < 2 || lines[0] != magic)
        throw std::runtime_error(path.string() + ": missing or unsupported snapshot header");
    lines.erase(lines.begin(), lines.begin() + 2);
    return lines;
}

template <typename Fn>
void for_each_word(std::string_view text, Fn&& fn) {
    if (text.empty()) return;
    for (auto w : tsv::split(text, ' '))
        if (!w.empty()) fn(w);
}

}  // namespace

Snapshot build_profiles(std::span<const ingest::Tweet> tweets) {
    Snapshot snap;
    std::map<std::string, VariantCounts> handle_variants;  // user_id -> raw handles
    std::map<ElementKey, VariantCounts> element_variants;
    std::unordered_map<std::string, std::string> author_of;      // in-corpus tweet -> author
    std::map<std::string, std::string> original_handle;          // original id -> casefolded handle

    for (const auto& t : tweets) {
        auto& p = snap.profiles[t.author_id];
        p.user_id = t.author_id;
        ++p.tweet_count;
        ++handle_variants[t.author_id][t.author_handle];
        author_of.emplace(t.tweet_id, t.author_id);

        auto keys = ingest::extract_elements(t);
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        for (auto& k : keys) ++p.element_counts[std::move(k)];

        for (const auto& raw : t.hashtags)
            if (auto key = ingest::normalize_hashtag(raw))
                ++element_variants[{ElementKind::Hashtag, *key}][strip_prefix(raw, '#')];

        if (t.is_retweet()) {
            const auto& orig = *t.retweet_of_tweet_id;
            p.retweeted_tweet_ids.insert(orig);
            auto& aud = snap.audiences[orig];
            aud.original_tweet_id = orig;
            aud.sharers.insert(t.author_id);
            if (auto handle = ingest::normalize_handle(*t.retweet_of_user_handle)) {
                ++element_variants[{ElementKind::RetweetedAccount, *handle}][strip_prefix(*t.retweet_of_user_handle, '@')];
                auto [it, inserted] = original_handle.emplace(orig, *handle);
                if (!inserted && *handle < it->second) it->second = *handle;
            }
        }
    }

    std::map<std::string, std::string> user_by_handle;
    for (auto& [id, p] : snap.profiles) {
        p.handle = most_frequent(handle_variants[id]);
        user_by_handle.emplace(casefold(p.handle), id);  // smallest id wins on collisions
    }

    for (auto& [orig, aud] : snap.audiences) {
        if (auto it = author_of.find(orig); it != author_of.end()) {
            aud.sharers.insert(it->second);
        } else if (auto h = original_handle.find(orig); h != original_handle.end()) {
            if (auto u = user_by_handle.find(h->second); u != user_by_handle.end()) aud.sharers.insert(u->second);
        }
    }

    for (const auto& [key, variants] : element_variants) snap.display[key] = most_frequent(variants);
    return snap;
}

std::string serialize_profiles(const ProfileMap& profiles) {
    std::string out;
    out += kProfilesMagic;
    out += "\nuser_id\thandle\ttweet_count\telement\tcount...\n";
    for (const auto& [id, p] : profiles) {
        out += id;
        out += '\t';
        out += p.handle;
        out += '\t';
        out += std::to_string(p.tweet_count);
        for (const auto& [key, count] : p.element_counts) {
            out += '\t';
            out += kind_tag(key.kind);
            out += ':';
            out += key.key;
            out += '\t';
            out += std::to_string(count);
        }
        out += '\n';
    }
    return out;
}

std::string serialize_audiences(const AudienceMap& audiences) {
    std::string out;
    out += kAudienceMagic;
    out += "\ntweet_id\tsharers\n";
    for (const auto& [id, aud] : audiences) {
        out += id;
        out += '\t';
        bool first = true;
        for (const auto& s : aud.sharers) {
            if (!first) out += ' ';
            out += s;
            first = false;
        }
        out += '\n';
    }
    return out;
}

void write_snapshot(const Snapshot& snap, const fs::path& dir) {
    fs::create_directories(dir);
    tsv::write_atomically(dir / "profiles.tsv", serialize_profiles(snap.profiles));
    tsv::write_atomically(dir / "audience.tsv", serialize_audiences(snap.audiences));

    std::string rt;
    rt += kRetweetedMagic;
    rt += "\nuser_id\tretweeted_tweet_ids\n";
    for (const auto& [id, p] : snap.profiles) {
        if (p.retweeted_tweet_ids.empty()) continue;
        rt += id;
        rt += '\t';
        bool first = true;
        for (const auto& t : p.retweeted_tweet_ids) {
            if (!first) rt += ' ';
            rt += t;
            first = false;
        }
        rt += '\n';
    }
    tsv::write_atomically(dir / "retweeted.tsv", rt);

    std::string disp;
    disp += kDisplayMagic;
    disp += "\nkind\tkey\tdisplay\n";
    for (const auto& [key, name] : snap.display) {
        disp += kind_name(key.kind);
        disp += '\t';
        disp += key.key;
        disp += '\t';
        disp += name;
        disp += '\n';
    }
    tsv::write_atomically(dir / "display.tsv", disp);
}

Snapshot read_snapshot(const fs::path& dir) {
    Snapshot snap;
    const auto profiles_path = (dir / "profiles.tsv").string();
    for (const auto& line : lines_after_header(dir / "profiles.tsv", kProfilesMagic)) {
        if (line.empty()) continue;
        const auto f = tsv::split(line);
        if (f.size() < 3 || (f.size() - 3) % 2 != 0) throw std::runtime_error("malformed row in " + profiles_path);
        UserProfile p;
        p.user_id = std::string(f[0]);
        p.handle = std::string(f[1]);
        p.tweet_count = parse_count(f[2], profiles_path);
        for (std::size_t i = 3; i < f.size(); i += 2) {
            const auto tagged = f[i];
            const auto kind = tagged.size() >= 3 && tagged[1] == ':' ? kind_from_tag(tagged[0]) : std::nullopt;
            if (!kind) throw std::runtime_error("bad element '" + std::string(tagged) + "' in " + profiles_path);
            p.element_counts[{*kind, std::string(tagged.substr(2))}] = parse_count(f[i + 1], profiles_path);
        }
        snap.profiles.emplace(p.user_id, std::move(p));
    }

    for (const auto& line : lines_after_header(dir / "retweeted.tsv", kRetweetedMagic)) {
        if (line.empty()) continue;
        const auto f = tsv::split(line);
        if (f.size() != 2) throw std::runtime_error("malformed row in retweeted.tsv");
        auto it = snap.profiles.find(std::string(f[0]));
        if (it == snap.profiles.end()) throw std::runtime_error("retweeted.tsv names unknown user " + std::string(f[0]));
        for_each_word(f[1], [&](std::string_view w) { it->second.retweeted_tweet_ids.emplace(w); });
    }

    for (const auto& line : lines_after_header(dir / "audience.tsv", kAudienceMagic)) {
        if (line.empty()) continue;
        const auto f = tsv::split(line);
        if (f.size() != 2) throw std::runtime_error("malformed row in audience.tsv");
        TweetAudience aud;
        aud.original_tweet_id = std::string(f[0]);
        for_each_word(f[1], [&](std::string_view w) { aud.sharers.emplace(w); });
        snap.audiences.emplace(aud.original_tweet_id, std::move(aud));
    }

    for (const auto& line : lines_after_header(dir / "display.tsv", kDisplayMagic)) {
        if (line.empty()) continue;
        const auto f = tsv::split(line);
        const auto kind = f.size() == 3 ? parse_kind(f[0]) : std::nullopt;
        if (!kind) throw std::runtime_error("malformed row in display.tsv");
        snap.display[{*kind, std::string(f[1])}] = std::string(f[2]);
    }
    return snap;
}

}  // namespace polarimeter::graph
