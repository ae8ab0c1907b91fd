#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "polarimeter/graph.hpp"
#include "polarimeter/ingest.hpp"
#include "polarimeter/labeling.hpp"
#include "polarimeter/report.hpp"
#include "polarimeter/synth.hpp"
#include "polarimeter/valence.hpp"

using namespace polarimeter;
using namespace polarimeter::synth;

namespace {

SynthConfig small(double overlap = 0.0) {
    SynthConfig c;
    c.users_per_group = 150;
    c.seeds_per_group = 10;
    c.overlap_fraction = overlap;
    c.seed = 5;
    return c;
}

}  // namespace

TEST_CASE("generation is deterministic") {
    const auto a = serialize_jsonl(generate(small()));
    CHECK(a == serialize_jsonl(generate(small())));
    auto other = small();
    other.seed = 6;
    CHECK(a != serialize_jsonl(generate(other)));
}

TEST_CASE("ground truth matches the configuration") {
    const auto cfg = small();
    const auto corpus = generate(cfg);
    std::size_t supp = 0, opp = 0;
    for (const auto& [id, s] : corpus.truth) {
        supp += s == Stance::Supp;
        opp += s == Stance::Opp;
    }
    CHECK(supp == cfg.users_per_group);
    CHECK(opp == cfg.users_per_group);
    CHECK(corpus.seeds.size() == 2 * cfg.seeds_per_group);
    for (const auto& [id, s] : corpus.seeds) CHECK(corpus.truth.at(id) == s);

    std::uint64_t planned = 0;
    for (const auto& [day, n] : corpus.day_plan) planned += n;
    CHECK(planned == corpus.tweets.size());
    CHECK(corpus.day_plan.size() == cfg.days);
}

TEST_CASE("the corpus parses cleanly and matches the day plan") {
    const auto corpus = generate(small(0.05));
    std::istringstream in(serialize_jsonl(corpus));
    const auto parsed = ingest::ingest_stream(in);
    CHECK(parsed.stats.skipped_lines == 0);
    CHECK(parsed.stats.filtered_out == 0);
    CHECK(parsed.stats.duplicate_tweets == 0);
    CHECK(parsed.tweets.size() == corpus.tweets.size());

    const auto daily = report::daily_counts(parsed.tweets);
    CHECK(daily.rows.size() == corpus.day_plan.size());
    for (const auto& [day, n] : daily.rows) CHECK(corpus.day_plan.at(day) == n);

    std::size_t dropped = 0;
    for (const auto& t : parsed.tweets) ingest::extract_elements(t, &dropped);
    CHECK(dropped == 0);
}

TEST_CASE("without overlap the groups share no element") {
    const auto corpus = generate(small());
    const auto snap = graph::build_profiles(corpus.tweets);
    std::set<ElementKey> supp, opp;
    for (const auto& [id, p] : snap.profiles)
        for (const auto& [key, n] : p.element_counts) (corpus.truth.at(id) == Stance::Supp ? supp : opp).insert(key);
    for (const auto& k : supp) CHECK_FALSE(opp.count(k));
    CHECK(supp.size() > 50);
    CHECK(opp.size() > 50);

    SUBCASE("so every scored element has valence exactly plus or minus one after propagation") {
        labeling::LabelMap seeds;
        for (const auto& [id, s] : corpus.seeds) seeds[id] = labeling::StanceLabel::seed(s);
        const auto result = labeling::propagate(snap.profiles, snap.audiences, seeds);
        CHECK(result.converged);
        for (auto kind : kAllKinds) {
            const auto table = valence::build_valence_table(snap.profiles, result.labels, kind, 1);
            CHECK_FALSE(table.rows.empty());
            for (const auto& r : table.rows) CHECK(std::abs(r.valence) == 1.0);
        }
    }
}

TEST_CASE("with overlap the shared vocabulary shows up in both groups") {
    const auto corpus = generate(small(0.2));
    const auto snap = graph::build_profiles(corpus.tweets);
    std::set<ElementKey> supp, opp;
    for (const auto& [id, p] : snap.profiles)
        for (const auto& [key, n] : p.element_counts) (corpus.truth.at(id) == Stance::Supp ? supp : opp).insert(key);
    std::size_t common = 0;
    for (const auto& k : supp) common += opp.count(k);
    CHECK(common > 10);
}

TEST_CASE("config validation and JSON") {
    auto bad = small();
    bad.hashtags = {10, 11};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(generate(bad), ConfigError);
    bad = small();
    bad.retweet_probability = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = small();
    bad.seeds_per_group = 500;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = small();
    bad.min_tweets_per_user = 10;
    bad.max_tweets_per_user = 5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    const auto cfg = small(0.05);
    CHECK(config_from_json(config_to_json(cfg)) == cfg);
    CHECK(config_from_json("{}") == SynthConfig{});
    CHECK(config_from_json(R"({"users_per_group": 70, "hashtags": {"per_group": 40}})").users_per_group == 70);
    CHECK_THROWS_AS(config_from_json(R"({"users": 7})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"hashtags": {"size": 7}})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"users_per_group": "many"})"), ConfigError);
    CHECK_THROWS_AS(config_from_json("not json"), ConfigError);
}

TEST_CASE("corpus files") {
    testing::TempDir dir("synth");
    const auto corpus = generate(small());
    write_corpus(corpus, dir.path());
    CHECK(testing::slurp(dir / "tweets.jsonl") == serialize_jsonl(corpus));
    const auto truth = testing::slurp(dir / "truth.tsv");
    CHECK(truth.rfind("user_id\tstance\n", 0) == 0);
    const auto seeds = labeling::load_seeds(dir / "seeds.tsv");
    CHECK(seeds.size() == corpus.seeds.size());
}
