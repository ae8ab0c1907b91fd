#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "polarimeter/ingest.hpp"
#include "polarimeter/types.hpp"

namespace polarimeter::synth {

struct VocabSize {
    std::uint32_t per_group = 100;  // elements exclusive to each group
    std::uint32_t shared = 10;      // elements both groups draw from

    bool operator==(const VocabSize&) const = default;
};

struct SynthConfig {
    std::uint32_t users_per_group = 1000;
    std::uint32_t seeds_per_group = 20;
    std::uint32_t min_tweets_per_user = 20;
    std::uint32_t max_tweets_per_user = 60;
    std::uint32_t seed_user_tweets = 200;  // seeds are the heaviest posters
    VocabSize hashtags{300, 30};
    VocabSize accounts{150, 15};
    VocabSize websites{200, 20};
    std::uint32_t originals_per_account = 10;
    double overlap_fraction = 0.0;  // share of element draws taken from the shared vocabulary
    double retweet_probability = 0.5;
    double url_probability = 0.5;
    std::uint32_t max_hashtags_per_tweet = 3;
    double zipf_exponent = 1.0;
    std::string start_date = "2018-09-28";
    std::uint32_t days = 3;
    std::uint64_t seed = 42;

    /// Throws ConfigError for an infeasible configuration.
    void validate() const;
    bool operator==(const SynthConfig&) const = default;
};

/// Reads a JSON config; unknown keys are rejected with ConfigError.
SynthConfig config_from_json(std::string_view text);
std::string config_to_json(const SynthConfig& config);

struct SynthCorpus {
    std::vector<ingest::Tweet> tweets;
    std::map<std::string, Stance> truth;  // user_id -> SUPP/OPP
    std::vector<std::pair<std::string, Stance>> seeds;
    std::map<std::string, std::uint64_t> day_plan;  // UTC date -> tweets generated that day
};

/// Two communities drawing hashtags, websites and retweeted accounts from Zipf-weighted
/// vocabularies: group-exclusive elements with probability 1 - overlap_fraction, shared ones
/// otherwise. Retweets go to originals of the drawn account, so overlap_fraction 0 yields
/// disjoint retweet supports. Output depends only on the config.
SynthCorpus generate(const SynthConfig& config);

/// Writes tweets.jsonl, truth.tsv, seeds.tsv and day_plan.tsv into dir.
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);
std::string serialize_jsonl(const SynthCorpus& corpus);

}  // namespace polarimeter::synth
