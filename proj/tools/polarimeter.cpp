// polarimeter: stance labeling and polarization analysis over a tweet corpus.
//
//   polarimeter run --config pipeline.json --out artifacts/
//   polarimeter synth --config synth.json --out corpus/
//   polarimeter propagate --config pipeline.json --out artifacts/ --supp-threshold 15 --opp-threshold 7
//
// Stage subcommands read and write the same artifact tree as `run` and always recompute.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "polarimeter/parallel.hpp"
#include "polarimeter/pipeline.hpp"
#include "polarimeter/synth.hpp"

namespace fs = std::filesystem;
using namespace polarimeter;

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_logger_mt("polarimeter");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("POLARIMETER_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

std::vector<ElementKind> parse_kinds(const std::string& name) {
    if (name.empty() || name == "all") return {std::begin(kAllKinds), std::end(kAllKinds)};
    const auto kind = parse_kind(name);
    if (!kind) throw ConfigError("unknown element kind '" + name + "' (hashtag, account, website)");
    return {*kind};
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();

    CLI::App app{"Stance labeling and polarization analysis for tweet corpora"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = "polarimeter-out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    app.add_option("--config", config_path, "Pipeline config (JSON); for `synth`, the generator config");
    app.add_option("--out", out_dir, "Artifact directory; for `synth`, the corpus directory");
    app.add_option("--seed", seed, "Top-level seed; every stage seed derives from it");
    app.add_option("--threads", threads, "Worker threads (default: machine parallelism)");

    // Per-stage overrides.
    std::optional<std::string> corpus, seeds, annotations, since, until, kind;
    std::vector<std::string> keywords;
    bool no_filter = false, unweighted = false;
    std::optional<std::uint32_t> supp_threshold, opp_threshold, max_iterations, dim, epochs, layout_iterations;
    std::optional<double> learning_rate, confidence, edge_floor;
    std::optional<std::size_t> min_accounts, min_elements, sample, top_k;
    std::optional<std::uint64_t> min_support;

    auto* run = app.add_subcommand("run", "Run every stage, skipping those whose inputs are unchanged");
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic polarized corpus");

    auto* ingest = app.add_subcommand("ingest", "Parse the corpus and build user profiles");
    ingest->add_option("--corpus", corpus, "tweets.jsonl");
    ingest->add_option("--keywords", keywords, "Keyword list (default: built-in list)");
    ingest->add_flag("--no-keyword-filter", no_filter, "Keep every tweet");
    ingest->add_option("--since", since, "RFC 3339 lower bound (inclusive)");
    ingest->add_option("--until", until, "RFC 3339 upper bound (exclusive)");

    auto* propagate = app.add_subcommand("propagate", "Label users by retweet overlap with seed labels");
    propagate->add_option("--seeds", seeds, "Seed TSV (user, SUPP|OPP|EXCLUDED)");
    propagate->add_option("--supp-threshold", supp_threshold);
    propagate->add_option("--opp-threshold", opp_threshold);
    propagate->add_option("--max-iterations", max_iterations);

    auto* train = app.add_subcommand("train", "Train the retweeted-account classifier");
    train->add_option("--dim", dim);
    train->add_option("--epochs", epochs);
    train->add_option("--learning-rate", learning_rate);

    auto* classify = app.add_subcommand("classify", "Label remaining users with the classifier");
    classify->add_option("--min-accounts", min_accounts);
    classify->add_option("--confidence", confidence);

    auto* valence = app.add_subcommand("valence", "Score and bin elements");
    valence->add_option("--min-support", min_support);
    valence->add_option("--kind", kind, "hashtag, account or website (default: all)");

    auto* similarity = app.add_subcommand("similarity", "Sample users and build cosine similarity graphs");
    similarity->add_option("--kind", kind, "hashtag, account or website (default: all)");
    similarity->add_option("--sample", sample);
    similarity->add_option("--edge-floor", edge_floor);
    similarity->add_option("--min-elements", min_elements);

    auto* layout = app.add_subcommand("layout", "Force-directed layout and SVG rendering");
    layout->add_option("--kind", kind, "hashtag, account or website (default: all)");
    layout->add_option("--iterations", layout_iterations);
    layout->add_flag("--unweighted", unweighted, "Ignore edge weights in attraction");

    auto* report = app.add_subcommand("report", "Write summary tables");
    report->add_option("--top-k", top_k);
    report->add_option("--annotations", annotations, "TSV of website key, bias, credibility");

    CLI11_PARSE(app, argc, argv);
    set_thread_count(threads);

    try {
        if (synth_cmd->parsed()) {
            synth::SynthConfig cfg;
            if (!config_path.empty()) {
                std::ifstream in(config_path);
                if (!in) throw ConfigError("cannot read synth config " + config_path);
                std::ostringstream buf;
                buf << in.rdbuf();
                cfg = synth::config_from_json(buf.str());
            }
            if (seed) cfg.seed = *seed;
            const auto corpus_data = synth::generate(cfg);
            synth::write_corpus(corpus_data, out_dir);
            spdlog::info("synth: {} tweets, {} users written to {}", corpus_data.tweets.size(), corpus_data.truth.size(),
                         out_dir);
            return 0;
        }

        pipeline::PipelineConfig cfg;
        if (!config_path.empty()) cfg = pipeline::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (corpus) {
            cfg.corpus = fs::path(*corpus);
            cfg.synth.reset();
        }
        if (seeds) cfg.seeds = fs::path(*seeds);
        if (annotations) cfg.annotations = fs::path(*annotations);
        if (!keywords.empty()) cfg.keywords = keywords;
        if (no_filter) cfg.keyword_filter = false;
        if (since) cfg.since = *since;
        if (until) cfg.until = *until;
        if (supp_threshold) cfg.propagation.supp_threshold = *supp_threshold;
        if (opp_threshold) cfg.propagation.opp_threshold = *opp_threshold;
        if (max_iterations) cfg.propagation.max_iterations = *max_iterations;
        if (dim) cfg.dim = *dim;
        if (epochs) cfg.epochs = *epochs;
        if (learning_rate) cfg.learning_rate = *learning_rate;
        if (min_accounts) cfg.expansion.min_distinct_accounts = *min_accounts;
        if (confidence) cfg.expansion.confidence_threshold = *confidence;
        if (min_support) cfg.min_support = *min_support;
        if (sample) cfg.sample = *sample;
        if (edge_floor) cfg.edge_floor = *edge_floor;
        if (min_elements) cfg.min_elements = *min_elements;
        if (layout_iterations) cfg.layout_iterations = *layout_iterations;
        if (unweighted) cfg.layout_weighted = false;
        if (top_k) cfg.top_k = *top_k;
        if (kind) cfg.kinds = parse_kinds(*kind);
        cfg.propagation.validate();

        if (run->parsed()) {
            if (config_path.empty()) throw ConfigError("run needs --config");
            const auto outcomes = pipeline::run_pipeline(cfg, out_dir);
            std::size_t skipped = 0;
            for (const auto& o : outcomes) skipped += o.skipped;
            spdlog::info("run: {} stages, {} skipped, artifacts in {}", outcomes.size(), skipped, out_dir);
            return 0;
        }
        for (auto* sub : app.get_subcommands()) pipeline::run_stage(sub->get_name(), cfg, out_dir, /*force=*/true);
        return 0;
    } catch (const pipeline::StageError& e) {
        spdlog::error("stage {} failed: {}", e.stage(), e.what());
        return 2;
    } catch (const ConfigError& e) {
        spdlog::error("configuration error: {}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
}
