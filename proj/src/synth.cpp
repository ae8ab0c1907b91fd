#include "polarimeter/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "polarimeter/random.hpp"
#include "polarimeter/tsv.hpp"

namespace polarimeter::synth {

using nlohmann::json;

void SynthConfig::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("synth config: " + what); };
    if (users_per_group == 0) fail("users_per_group must be positive");
    if (seeds_per_group > users_per_group) fail("seeds_per_group exceeds users_per_group");
    if (min_tweets_per_user == 0 || min_tweets_per_user > max_tweets_per_user)
        fail("tweets per user range must be positive and ordered");
    if (seed_user_tweets == 0) fail("seed_user_tweets must be positive");
    for (const auto* v : {&hashtags, &accounts, &websites}) {
        if (v->per_group == 0) fail("vocabulary sizes must be positive");
        if (v->shared > v->per_group) fail("shared vocabulary larger than the group vocabulary");
        if (overlap_fraction > 0.0 && v->shared == 0) fail("overlap_fraction > 0 needs a shared vocabulary");
    }
    if (originals_per_account == 0) fail("originals_per_account must be positive");
    for (double p : {overlap_fraction, retweet_probability, url_probability})
        if (!(p >= 0.0 && p <= 1.0)) fail("probabilities must lie in [0, 1]");
    if (!(zipf_exponent >= 0.0) || !std::isfinite(zipf_exponent)) fail("zipf_exponent must be nonnegative");
    if (days == 0) fail("days must be positive");
    if (!ingest::parse_rfc3339(start_date + "T00:00:00Z")) fail("start_date must be YYYY-MM-DD");
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : obj.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

void read_vocab(const json& obj, const char* key, VocabSize& out) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    reject_unknown(v, {"per_group", "shared"}, key);
    read_field(v, "per_group", out.per_group);
    read_field(v, "shared", out.shared);
}

/// Inverse-CDF sampler over ranks 0..n-1 with weight 1 / (rank + 1)^s.
class Zipf {
public:
    Zipf(std::uint32_t n, double exponent) : cdf_(n) {
        double acc = 0.0;
        for (std::uint32_t r = 0; r < n; ++r) {
            acc += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
            cdf_[r] = acc;
        }
        for (auto& c : cdf_) c /= acc;
    }
    std::uint32_t operator()(Rng& rng) const {
        const double u = uniform01(rng);
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<std::uint32_t>(std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1));
    }

private:
    std::vector<double> cdf_;
};

/// Group-exclusive pool with probability 1 - overlap, shared pool otherwise.
struct Pools {
    Zipf group;
    Zipf shared;
    std::uint32_t shared_size;

    Pools(const VocabSize& v, double exponent)
        : group(v.per_group, exponent), shared(std::max<std::uint32_t>(v.shared, 1), exponent), shared_size(v.shared) {}

    /// Returns (is_shared, index).
    std::pair<bool, std::uint32_t> draw(Rng& rng, double overlap) const {
        if (shared_size > 0 && overlap > 0.0 && uniform01(rng) < overlap) return {true, shared(rng)};
        return {false, group(rng)};
    }
};

std::string group_prefix(int group) { return group == 0 ? "Supp" : "Opp"; }

}  // namespace

SynthConfig config_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("synth config is not valid JSON: ") + e.what());
    }
    reject_unknown(doc,
                   {"users_per_group", "seeds_per_group", "min_tweets_per_user", "max_tweets_per_user",
                    "seed_user_tweets", "hashtags", "accounts", "websites", "originals_per_account",
                    "overlap_fraction", "retweet_probability", "url_probability", "max_hashtags_per_tweet",
                    "zipf_exponent", "start_date", "days", "seed"},
                   "synth config");
    SynthConfig c;
    read_field(doc, "users_per_group", c.users_per_group);
    read_field(doc, "seeds_per_group", c.seeds_per_group);
    read_field(doc, "min_tweets_per_user", c.min_tweets_per_user);
    read_field(doc, "max_tweets_per_user", c.max_tweets_per_user);
    read_field(doc, "seed_user_tweets", c.seed_user_tweets);
    read_vocab(doc, "hashtags", c.hashtags);
    read_vocab(doc, "accounts", c.accounts);
    read_vocab(doc, "websites", c.websites);
    read_field(doc, "originals_per_account", c.originals_per_account);
    read_field(doc, "overlap_fraction", c.overlap_fraction);
    read_field(doc, "retweet_probability", c.retweet_probability);
    read_field(doc, "url_probability", c.url_probability);
    read_field(doc, "max_hashtags_per_tweet", c.max_hashtags_per_tweet);
    read_field(doc, "zipf_exponent", c.zipf_exponent);
    read_field(doc, "start_date", c.start_date);
    read_field(doc, "days", c.days);
    read_field(doc, "seed", c.seed);
    c.validate();
    return c;
}

std::string config_to_json(const SynthConfig& c) {
    auto vocab = [](const VocabSize& v) { return json{{"per_group", v.per_group}, {"shared", v.shared}}; };
    json doc = {{"users_per_group", c.users_per_group},
                {"seeds_per_group", c.seeds_per_group},
                {"min_tweets_per_user", c.min_tweets_per_user},
                {"max_tweets_per_user", c.max_tweets_per_user},
                {"seed_user_tweets", c.seed_user_tweets},
                {"hashtags", vocab(c.hashtags)},
                {"accounts", vocab(c.accounts)},
                {"websites", vocab(c.websites)},
                {"originals_per_account", c.originals_per_account},
                {"overlap_fraction", c.overlap_fraction},
                {"retweet_probability", c.retweet_probability},
                {"url_probability", c.url_probability},
                {"max_hashtags_per_tweet", c.max_hashtags_per_tweet},
                {"zipf_exponent", c.zipf_exponent},
                {"start_date", c.start_date},
                {"days", c.days},
                {"seed", c.seed}};
    return doc.dump(2) + "\n";
}

SynthCorpus generate(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const Pools hashtag_pool(cfg.hashtags, cfg.zipf_exponent);
    const Pools account_pool(cfg.accounts, cfg.zipf_exponent);
    const Pools website_pool(cfg.websites, cfg.zipf_exponent);
    const auto& keywords = ingest::default_keywords();
    const std::int64_t start = *ingest::parse_rfc3339(cfg.start_date + "T00:00:00Z");

    auto hashtag_text = [&](int group, bool shared, std::uint32_t i) {
        std::string tag = shared ? fmt::format("SharedTag{}", i) : fmt::format("{}Tag{}", group_prefix(group), i);
        // A lowercase spelling now and then, so counting has casing variants to merge.
        if (uniform01(rng) < 0.2) tag = casefold(tag);
        return "#" + tag;
    };
    auto account_handle = [&](int group, bool shared, std::uint32_t i) {
        return shared ? fmt::format("WireDesk{}", i) : fmt::format("{}News{}", group_prefix(group), i);
    };
    auto account_offset = [&](int group, bool shared, std::uint32_t i) -> std::uint64_t {
        if (shared) return 2ull * cfg.accounts.per_group + i;
        return static_cast<std::uint64_t>(group) * cfg.accounts.per_group + i;
    };
    auto website_url = [&](int group, bool shared, std::uint32_t i) {
        const std::uint64_t article = rng() % 1000000;
        // Every tenth site is a twitter.com profile so that key shape shows up too.
        if (i % 10 == 9) {
            const auto handle = shared ? fmt::format("SharedVoice{}", i) : fmt::format("{}Voice{}", group_prefix(group), i);
            return fmt::format("https://twitter.com/{}/status/{}", handle, article);
        }
        const auto host = shared ? fmt::format("shared-news{}.com", i)
                                 : fmt::format("{}-site{}.com", casefold(group_prefix(group)), i);
        return fmt::format("https://{}{}/article/{}", (article % 2) ? "www." : "", host, article);
    };

    SynthCorpus corpus;
    std::uint64_t next_tweet = 1000000000ull;
    for (int group = 0; group < 2; ++group) {
        const Stance stance = group == 0 ? Stance::Supp : Stance::Opp;
        const std::uint64_t id_base = group == 0 ? 100000 : 200000;
        for (std::uint32_t u = 0; u < cfg.users_per_group; ++u) {
            const std::string user_id = std::to_string(id_base + u);
            const std::string handle = fmt::format("{}_user_{:04d}", casefold(group_prefix(group)), u);
            corpus.truth.emplace(user_id, stance);
            const bool is_seed = u < cfg.seeds_per_group;
            if (is_seed) corpus.seeds.emplace_back(user_id, stance);
            const std::uint32_t span = cfg.max_tweets_per_user - cfg.min_tweets_per_user + 1;
            const std::uint32_t n_tweets =
                is_seed ? cfg.seed_user_tweets : cfg.min_tweets_per_user + static_cast<std::uint32_t>(bounded(rng, span));

            for (std::uint32_t k = 0; k < n_tweets; ++k) {
                ingest::Tweet t;
                t.tweet_id = std::to_string(next_tweet++);
                t.author_id = user_id;
                t.author_handle = handle;
                const std::uint64_t day = bounded(rng, cfg.days);
                t.created_at = start + static_cast<std::int64_t>(day * 86400 + bounded(rng, 86400));
                ++corpus.day_plan[ingest::format_date(t.created_at)];

                const std::uint32_t n_tags = static_cast<std::uint32_t>(bounded(rng, cfg.max_hashtags_per_tweet + 1ull));
                for (std::uint32_t h = 0; h < n_tags; ++h) {
                    const auto [shared, i] = hashtag_pool.draw(rng, cfg.overlap_fraction);
                    t.hashtags.push_back(hashtag_text(group, shared, i));
                }
                if (uniform01(rng) < cfg.url_probability) {
                    const auto [shared, i] = website_pool.draw(rng, cfg.overlap_fraction);
                    t.urls.push_back(website_url(group, shared, i));
                }
                if (uniform01(rng) < cfg.retweet_probability) {
                    const auto [shared, i] = account_pool.draw(rng, cfg.overlap_fraction);
                    const std::uint64_t original = bounded(rng, cfg.originals_per_account);
                    t.retweet_of_user_handle = account_handle(group, shared, i);
                    t.retweet_of_tweet_id =
                        std::to_string(5000000000ull + account_offset(group, shared, i) * 1000ull + original);
                }
                std::string text = t.is_retweet() ? "RT @" + *t.retweet_of_user_handle + ": " : std::string();
                text += keywords[bounded(rng, keywords.size())];
                text += " news";
                for (const auto& h : t.hashtags) text += " " + h;
                t.text = std::move(text);
                corpus.tweets.push_back(std::move(t));
            }
        }
    }
    return corpus;
}

std::string serialize_jsonl(const SynthCorpus& corpus) {
    std::string out;
    for (const auto& t : corpus.tweets) {
        out += ingest::to_json_line(t);
        out += '\n';
    }
    return out;
}

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    tsv::write_atomically(dir / "tweets.jsonl", serialize_jsonl(corpus));

    std::string truth = "user_id\tstance\n";
    for (const auto& [id, s] : corpus.truth) truth += id + '\t' + std::string(stance_name(s)) + '\n';
    tsv::write_atomically(dir / "truth.tsv", truth);

    std::string seeds = "# user\tstance\n";
    for (const auto& [id, s] : corpus.seeds) seeds += id + '\t' + std::string(stance_name(s)) + '\n';
    tsv::write_atomically(dir / "seeds.tsv", seeds);

    std::string plan = "date\tcount\n";
    for (const auto& [date, n] : corpus.day_plan) plan += date + '\t' + std::to_string(n) + '\n';
    tsv::write_atomically(dir / "day_plan.tsv", plan);
}

}  // namespace polarimeter::synth
