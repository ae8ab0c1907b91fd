// Acceptance suite: one PASS/FAIL line per criterion; exit status is nonzero when any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "polarimeter/classifier.hpp"
#include "polarimeter/graph.hpp"
#include "polarimeter/ingest.hpp"
#include "polarimeter/labeling.hpp"
#include "polarimeter/random.hpp"
#include "polarimeter/layout.hpp"
#include "polarimeter/similarity.hpp"
#include "polarimeter/synth.hpp"
#include "polarimeter/valence.hpp"

using namespace polarimeter;
namespace fs = std::filesystem;
using labeling::LabelMap;
using labeling::StanceLabel;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs one criterion; a thrown exception is a failure, and so is exceeding the time limit.
bool criterion(int number, const std::string& title, double limit_s, const std::function<Verdict()>& body) {
    const auto start = Clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = seconds_since(start);
    if (limit_s > 0 && elapsed >= limit_s) {
        v.pass = false;
        v.detail += fmt::format("; over the {:.0f} s limit", limit_s);
    }
    std::cout << fmt::format("{} [{}] {}: {} ({:.2f} s)", v.pass ? "PASS" : "FAIL", number, title, v.detail, elapsed)
              << std::endl;
    return v.pass;
}

LabelMap seed_labels(const synth::SynthCorpus& corpus) {
    LabelMap out;
    for (const auto& [id, st] : corpus.seeds) out[id] = StanceLabel::seed(st);
    return out;
}

LabelMap swap_groups(const LabelMap& labels) {
    LabelMap out = labels;
    for (auto& [id, l] : out) {
        if (l.value == Stance::Supp) l.value = Stance::Opp;
        else if (l.value == Stance::Opp) l.value = Stance::Supp;
    }
    return out;
}

// ---------------------------------------------------------------------------

Verdict valence_correctness() {
    synth::SynthConfig cfg;
    cfg.users_per_group = 125;
    cfg.seeds_per_group = 10;
    cfg.seed_user_tweets = 60;
    cfg.overlap_fraction = 0.3;
    cfg.seed = 101;
    const auto corpus = synth::generate(cfg);

    // Round trip through the text format so ingest is part of the path under test.
    std::istringstream jsonl(synth::serialize_jsonl(corpus));
    std::vector<ingest::Tweet> tweets;
    std::string line;
    while (std::getline(jsonl, line)) tweets.push_back(ingest::parse_tweet_line(line));

    const auto snap = graph::build_profiles(tweets);
    const auto labels = labeling::propagate(snap.profiles, snap.audiences, seed_labels(corpus)).labels;
    const auto swapped = swap_groups(labels);

    std::size_t checked = 0;
    double worst = 0.0;
    bool ok = tweets.size() >= 10000;
    for (auto kind : kAllKinds) {
        // Oracle: recount straight from the tweets, one count per tweet per element.
        std::map<std::string, std::pair<double, double>> tf;
        double tot_s = 0, tot_o = 0;
        std::set<std::string> seen_ids;
        for (const auto& t : tweets) {
            if (!seen_ids.insert(t.tweet_id).second) continue;
            const auto st = labeling::stance_of(labels, t.author_id);
            if (st != Stance::Supp && st != Stance::Opp) continue;
            std::set<std::string> keys;
            for (const auto& e : ingest::extract_elements(t))
                if (e.kind == kind) keys.insert(e.key);
            for (const auto& k : keys) {
                (st == Stance::Supp ? tf[k].first : tf[k].second) += 1;
                (st == Stance::Supp ? tot_s : tot_o) += 1;
            }
        }
        const auto table = valence::build_valence_table(snap.profiles, labels, kind, 1);
        const auto mirror = valence::build_valence_table(snap.profiles, swapped, kind, 1);
        ok = ok && table.rows.size() == tf.size() && mirror.rows.size() == table.rows.size();
        ok = ok && table.total_supp == tot_s && table.total_opp == tot_o;
        for (std::size_t i = 0; i < table.rows.size() && ok; ++i) {
            const auto& r = table.rows[i];
            const auto it = tf.find(r.element.key);
            if (it == tf.end()) {
                ok = false;
                break;
            }
            const double rs = it->second.first / tot_s, ro = it->second.second / tot_o;
            const double expected = 2.0 * rs / (rs + ro) - 1.0;
            worst = std::max(worst, std::abs(r.valence - expected));
            ok = ok && r.valence >= -1.0 && r.valence <= 1.0;
            ok = ok && mirror.rows[i].element == r.element && mirror.rows[i].valence == -r.valence;
            ++checked;
        }
    }
    ok = ok && worst < 1e-12;
    return {ok, fmt::format("{} tweets, {} elements, max |error| {:.2e}, group swap exact", tweets.size(), checked, worst)};
}

Verdict bin_edges() {
    using valence::ValenceBin;
    using valence::bin_of;
    const std::vector<std::pair<double, ValenceBin>> cases = {
        {-1.0, ValenceBin::StrongOpp}, {-0.6, ValenceBin::Opp},         {-0.2, ValenceBin::Neutral},
        {0.0, ValenceBin::Neutral},    {0.2, ValenceBin::Supp},         {0.6, ValenceBin::StrongSupp},
        {1.0, ValenceBin::StrongSupp}, {std::nextafter(-0.6, -1.0), ValenceBin::StrongOpp},
        {std::nextafter(-0.2, -1.0), ValenceBin::Opp}, {std::nextafter(0.2, -1.0), ValenceBin::Neutral},
        {std::nextafter(0.6, -1.0), ValenceBin::Supp}, {std::nextafter(1.0, -1.0), ValenceBin::StrongSupp}};
    int good = 0;
    for (const auto& [v, bin] : cases) good += bin_of(v) == bin;
    int rejected = 0;
    for (double bad : {std::nextafter(1.0, 2.0), std::nextafter(-1.0, -2.0), std::nan("")}) {
        try {
            (void)bin_of(bad);
        } catch (const std::domain_error&) {
            ++rejected;
        }
    }
    // Equal widths: each interior edge sits 0.4 from its neighbours.
    const double edges[] = {-1.0, -0.6, -0.2, 0.2, 0.6, 1.0};
    bool equal = true;
    for (int i = 1; i < 6; ++i) equal = equal && std::abs((edges[i] - edges[i - 1]) - 0.4) < 1e-15;
    return {good == static_cast<int>(cases.size()) && rejected == 3 && equal,
            fmt::format("{}/{} boundary values, {}/3 out-of-range rejected", good, cases.size(), rejected)};
}

Verdict propagation_recovery() {
    synth::SynthConfig cfg;
    cfg.users_per_group = 1000;
    cfg.seeds_per_group = 20;
    cfg.overlap_fraction = 0.0;
    cfg.seed = 303;
    const auto corpus = synth::generate(cfg);
    const auto snap = graph::build_profiles(corpus.tweets);
    const labeling::PropagationConfig pc;
    const auto result = labeling::propagate(snap.profiles, snap.audiences, seed_labels(corpus), pc);

    // Eligibility oracle: overlap counts with every other user of the same true group treated
    // as labeled. This bounds what propagation from the seeds can reach.
    std::size_t eligible = 0, recovered = 0, cross = 0;
    for (const auto& [id, profile] : snap.profiles) {
        const auto truth = corpus.truth.at(id);
        const auto label = labeling::stance_of(result.labels, id);
        if ((label == Stance::Supp || label == Stance::Opp) && label != truth) ++cross;
        if (result.labels.count(id) && result.labels.at(id).provenance == labeling::Provenance::Seed) continue;
        std::size_t same = 0, other = 0;
        for (const auto& tid : profile.retweeted_tweet_ids) {
            const auto it = snap.audiences.find(tid);
            if (it == snap.audiences.end()) continue;
            bool s = false, o = false;
            for (const auto& v : it->second.sharers) {
                if (v == id) continue;
                (corpus.truth.at(v) == truth ? s : o) = true;
            }
            same += s;
            other += o;
        }
        const auto threshold = truth == Stance::Supp ? pc.supp_threshold : pc.opp_threshold;
        if (same >= threshold && other == 0) {
            ++eligible;
            recovered += label == truth;
        }
    }
    const auto again = labeling::propagate(snap.profiles, snap.audiences, result.labels, pc);
    const std::size_t added_again = again.labels.size() - result.labels.size();
    const double recall = eligible ? double(recovered) / double(eligible) : 0.0;
    const bool ok = eligible > 0 && recall >= 0.95 && cross == 0 && result.converged && added_again == 0;
    return {ok, fmt::format("recall {}/{} = {:.4f}, {} cross-group labels, converged {} after {} rounds, rerun adds {}",
                            recovered, eligible, recall, cross, result.converged, result.trace.size(), added_again)};
}

classifier::Model random_model(std::mt19937_64& rng, std::size_t features, std::uint32_t dim) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    classifier::Model m;
    m.hyperparams.dim = dim;
    for (std::size_t i = 0; i < features; ++i) m.vocab.emplace("f" + std::to_string(i), static_cast<std::uint32_t>(i));
    m.embeddings.resize(features * dim);
    for (auto& e : m.embeddings) e = u(rng);
    m.output_weights.resize(dim * 2);
    for (auto& w : m.output_weights) w = u(rng);
    return m;
}

double max_gradient_error(classifier::Model m, const classifier::FeatureBag& bag, Stance label) {
    const double h = 1e-5;
    const auto g = classifier::loss_and_gradient(m, bag, label);
    double worst = 0.0;
    auto probe = [&](std::vector<double>& params, const std::vector<double>& analytic) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double keep = params[i];
            params[i] = keep + h;
            const double up = classifier::example_loss(m, bag, label);
            params[i] = keep - h;
            const double down = classifier::example_loss(m, bag, label);
            params[i] = keep;
            const double numeric = (up - down) / (2 * h);
            if (analytic[i] == 0.0 && numeric == 0.0) continue;
            worst = std::max(worst, std::abs(analytic[i] - numeric) /
                                        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6}));
        }
    };
    probe(m.embeddings, g.d_embeddings);
    probe(m.output_weights, g.d_output_weights);
    return worst;
}

Verdict classifier_accuracy() {
    synth::SynthConfig cfg;
    cfg.users_per_group = 600;
    cfg.overlap_fraction = 0.05;
    cfg.retweet_probability = 0.7;
    cfg.seed = 404;
    const auto corpus = synth::generate(cfg);
    const auto snap = graph::build_profiles(corpus.tweets);
    const auto labels = labeling::propagate(snap.profiles, snap.audiences, seed_labels(corpus)).labels;

    // Alternate users (in id order) between a training half and a held-out half.
    graph::ProfileMap held_out;
    LabelMap train_labels;
    bool hold = false;
    for (const auto& [id, profile] : snap.profiles) {
        if (hold) held_out.emplace(id, profile);
        else if (const auto it = labels.find(id); it != labels.end()) train_labels.emplace(id, it->second);
        hold = !hold;
    }
    const auto examples = classifier::training_examples(snap.profiles, train_labels);
    const auto model = classifier::train(examples, {16, 20, 0.1, derive_seed(cfg.seed, "classifier")});

    const classifier::ExpansionConfig ec;
    std::size_t candidates = 0;
    for (const auto& [id, p] : held_out) candidates += p.distinct_elements(ElementKind::RetweetedAccount) >= 20;
    const auto expanded = classifier::expand_labels(model, held_out, {}, ec);
    std::size_t correct = 0;
    for (const auto& [id, l] : expanded) correct += l.value == corpus.truth.at(id);
    const double accuracy = expanded.empty() ? 0.0 : double(correct) / double(expanded.size());

    std::mt19937_64 rng(4242);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = random_model(rng, 3 + trial % 6, 2 + static_cast<std::uint32_t>(trial % 5));
        classifier::FeatureBag bag;
        for (std::size_t i = 0; i < m.vocab.size(); ++i)
            if (rng() % 3) bag["f" + std::to_string(i)] = 1 + rng() % 4;
        if (bag.empty()) bag["f0"] = 1;
        worst = std::max(worst, max_gradient_error(m, bag, trial % 2 ? Stance::Supp : Stance::Opp));
    }
    const bool ok = !expanded.empty() && accuracy >= 0.95 && worst < 1e-4;
    return {ok, fmt::format("{} training examples; held-out {} users with >= 20 accounts, {} labeled at > 0.9, "
                            "accuracy {:.4f}; gradient max relative error {:.2e}",
                            examples.size(), candidates, expanded.size(), accuracy, worst)};
}

Verdict normalization() {
    const auto v = similarity::UserVector::from_counts("u", ElementKind::Hashtag, {{"a", 5}, {"b", 100}, {"c", 895}});
    const bool ok = v.weights.size() == 3 && v.weights[0].second == 0.005 && v.weights[1].second == 0.100 &&
                    v.weights[2].second == 0.895;
    return {ok, fmt::format("weights {} {} {}", v.weights.at(0).second, v.weights.at(1).second, v.weights.at(2).second)};
}

Verdict separation() {
    synth::SynthConfig cfg;
    cfg.users_per_group = 2000;
    cfg.min_tweets_per_user = 40;
    cfg.overlap_fraction = 0.05;
    cfg.seed = 606;
    const auto corpus = synth::generate(cfg);
    const auto snap = graph::build_profiles(corpus.tweets);
    auto labels = labeling::propagate(snap.profiles, snap.audiences, seed_labels(corpus)).labels;
    const auto examples = classifier::training_examples(snap.profiles, labels);
    const auto model = classifier::train(examples, {16, 20, 0.1, derive_seed(cfg.seed, "classifier")});
    labels = classifier::expand_labels(model, snap.profiles, labels);

    bool ok = true;
    std::string detail;
    for (auto kind : kAllKinds) {
        const auto table = valence::build_valence_table(snap.profiles, labels, kind, 100);
        const auto h = valence::bin_histogram(table);
        std::uint64_t n = 0, usage = 0;
        for (const auto& b : h) {
            n += b.element_count;
            usage += b.usage;
        }
        const double ext_n = n ? double(h[0].element_count + h[4].element_count) / double(n) : 0.0;
        const double ext_u = usage ? double(h[0].usage + h[4].usage) / double(usage) : 0.0;

        const auto vectors = similarity::build_vectors(snap.profiles, kind, 10);
        const auto sampled = similarity::sample_users(vectors, labels, 2000, derive_seed(cfg.seed, "similarity/" + std::string(kind_name(kind))));
        const auto cos = similarity::group_cosine_means(sampled, labels);
        const auto graph = similarity::build_similarity_graph(sampled, labels, 0.1);
        layout::LayoutConfig lc;
        lc.seed = derive_seed(cfg.seed, "layout/" + std::string(kind_name(kind)));
        const auto points = layout::fruchterman_reingold(graph, lc);
        const auto dist = layout::group_distance_means(points);

        const bool kind_ok = n > 0 && ext_n > 0.6 && ext_u > 0.6 && sampled.size() == 2000 &&
                             cos.intra_mean > cos.inter_mean && dist.intra_mean < dist.inter_mean;
        ok = ok && kind_ok;
        detail += fmt::format("{}{}: extremes {:.3f} of {} elements, {:.3f} of usage; cosine {:.4f}/{:.4f}; "
                              "distance {:.4f}/{:.4f} over {} nodes {} edges",
                              detail.empty() ? "" : " | ", kind_name(kind), ext_n, n, ext_u, cos.intra_mean,
                              cos.inter_mean, dist.intra_mean, dist.inter_mean, points.size(), graph.edges.size());
    }
    return {ok, detail};
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        out[fs::relative(e.path(), root).string()] = buf.str();
    }
    return out;
}

Verdict determinism() {
    const fs::path fixture = fs::path(POLARIMETER_FIXTURES) / "pipeline" / "pipeline.json";
    const fs::path work = fs::temp_directory_path() / fmt::format("polarimeter_acceptance_{}", ::getpid());
    fs::remove_all(work);
    auto run = [&](const fs::path& out) {
        const std::string cmd = fmt::format("{} run --config {} --out {} --seed 42 2>/dev/null", POLARIMETER_BIN,
                                            fixture.string(), out.string());
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) && WEXITSTATUS(status) == 0;
    };
    const bool ran = run(work / "a") && run(work / "b");
    Verdict v;
    if (!ran) {
        v = {false, "run exited nonzero"};
    } else {
        const auto a = tree(work / "a"), b = tree(work / "b");
        std::size_t bytes = 0;
        for (const auto& [name, data] : a) bytes += data.size();
        v = {a == b && a.size() > 20, fmt::format("{} files, {} bytes, trees identical: {}", a.size(), bytes, a == b)};
    }
    fs::remove_all(work);
    return v;
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::warn);
    int failed = 0;
    failed += !criterion(1, "valence matches recount, antisymmetric", 5, valence_correctness);
    failed += !criterion(2, "bin edges", 0, bin_edges);
    failed += !criterion(3, "propagation recovery", 10, propagation_recovery);
    failed += !criterion(4, "classifier expansion and gradients", 30, classifier_accuracy);
    failed += !criterion(5, "L1 normalization 5/100/895", 0, normalization);
    failed += !criterion(6, "polarization separation", 60, separation);
    failed += !criterion(7, "deterministic run", 30, determinism);
    std::cout << (failed ? fmt::format("{} criteria failed", failed) : std::string("all criteria passed")) << std::endl;
    return failed ? 1 : 0;
}
