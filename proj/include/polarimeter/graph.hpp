#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>

#include "polarimeter/ingest.hpp"
#include "polarimeter/types.hpp"

namespace polarimeter::graph {

struct UserProfile {
    std::string user_id;
    std::string handle;
    std::uint64_t tweet_count = 0;
    /// Number of the user's tweets in which each element appears (at most one per tweet).
    std::map<ElementKey, std::uint64_t> element_counts;
    std::set<std::string> retweeted_tweet_ids;

    std::size_t distinct_elements(ElementKind kind) const;
    std::uint64_t element_total(ElementKind kind) const;

    bool operator==(const UserProfile&) const = default;
};

/// Users who authored or retweeted an original tweet. Only originals retweeted at least once
/// inside the corpus get an entry.
struct TweetAudience {
    std::string original_tweet_id;
    std::set<std::string> sharers;

    bool operator==(const TweetAudience&) const = default;
};

using ProfileMap = std::map<std::string, UserProfile>;
using AudienceMap = std::map<std::string, TweetAudience>;
/// Display form per element: its most frequent raw spelling, ties broken lexicographically.
using DisplayNames = std::map<ElementKey, std::string>;

struct Snapshot {
    ProfileMap profiles;
    AudienceMap audiences;
    DisplayNames display;

    bool operator==(const Snapshot&) const = default;
};

/// Aggregates a deduplicated tweet stream into per-user profiles and retweet audiences.
/// An original's author joins its audience when the author is a corpus user, matched by
/// user id when the original itself is in the corpus and by casefolded handle otherwise.
Snapshot build_profiles(std::span<const ingest::Tweet> tweets);

/// Writes profiles.tsv, retweeted.tsv, audience.tsv and display.tsv into dir.
void write_snapshot(const Snapshot& snapshot, const std::filesystem::path& dir);
Snapshot read_snapshot(const std::filesystem::path& dir);

std::string serialize_profiles(const ProfileMap& profiles);
std::string serialize_audiences(const AudienceMap& audiences);

}  // namespace polarimeter::graph
