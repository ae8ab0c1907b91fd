#include "polarimeter/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "polarimeter/graph.hpp"
#include "polarimeter/ingest.hpp"
#include "polarimeter/layout.hpp"
#include "polarimeter/random.hpp"
#include "polarimeter/report.hpp"
#include "polarimeter/similarity.hpp"
#include "polarimeter/tsv.hpp"
#include "polarimeter/valence.hpp"

namespace polarimeter::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

StageError::StageError(std::string stage, const std::string& message)
    : std::runtime_error("stage '" + stage + "': " + message), stage_(std::move(stage)) {}

// ---------------------------------------------------------------------------
// config

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

std::optional<fs::path> read_path(const json& obj, const char* key, const fs::path& base) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    std::string s;
    read_field(obj, key, s);
    fs::path p(s);
    return p.is_absolute() ? p : base / p;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(doc,
                   {"version", "corpus", "synth", "seeds", "annotations", "seed", "ingest", "propagation", "classifier",
                    "valence", "similarity", "layout", "kinds"},
                   "config");
    PipelineConfig c;
    if (!doc.contains("version")) throw ConfigError("config needs a 'version' field");
    read_field(doc, "version", c.version);
    if (c.version != 1) throw ConfigError("unsupported config version " + std::to_string(c.version));

    c.corpus = read_path(doc, "corpus", base_dir);
    c.seeds = read_path(doc, "seeds", base_dir);
    c.annotations = read_path(doc, "annotations", base_dir);
    read_field(doc, "seed", c.seed);
    if (doc.contains("synth")) c.synth = synth::config_from_json(doc.at("synth").dump());
    if (c.corpus && c.synth) throw ConfigError("config names both a corpus and a synth section");

    if (doc.contains("ingest")) {
        const auto& s = doc.at("ingest");
        reject_unknown(s, {"keywords", "keyword_filter", "since", "until"}, "ingest");
        read_field(s, "keywords", c.keywords);
        read_field(s, "keyword_filter", c.keyword_filter);
        if (s.contains("since")) c.since = s.at("since").get<std::string>();
        if (s.contains("until")) c.until = s.at("until").get<std::string>();
        for (const auto* ts : {&c.since, &c.until})
            if (*ts && !ingest::parse_rfc3339(**ts)) throw ConfigError("ingest since/until must be RFC 3339");
    }
    if (doc.contains("propagation")) {
        const auto& s = doc.at("propagation");
        reject_unknown(s, {"supp_threshold", "opp_threshold", "max_iterations"}, "propagation");
        read_field(s, "supp_threshold", c.propagation.supp_threshold);
        read_field(s, "opp_threshold", c.propagation.opp_threshold);
        read_field(s, "max_iterations", c.propagation.max_iterations);
        c.propagation.validate();
    }
    if (doc.contains("classifier")) {
        const auto& s = doc.at("classifier");
        reject_unknown(s, {"dim", "epochs", "learning_rate", "min_accounts", "confidence"}, "classifier");
        read_field(s, "dim", c.dim);
        read_field(s, "epochs", c.epochs);
        read_field(s, "learning_rate", c.learning_rate);
        read_field(s, "min_accounts", c.expansion.min_distinct_accounts);
        read_field(s, "confidence", c.expansion.confidence_threshold);
    }
    if (doc.contains("valence")) {
        const auto& s = doc.at("valence");
        reject_unknown(s, {"min_support", "top_k"}, "valence");
        read_field(s, "min_support", c.min_support);
        read_field(s, "top_k", c.top_k);
    }
    if (doc.contains("similarity")) {
        const auto& s = doc.at("similarity");
        reject_unknown(s, {"min_elements", "sample", "edge_floor"}, "similarity");
        read_field(s, "min_elements", c.min_elements);
        read_field(s, "sample", c.sample);
        read_field(s, "edge_floor", c.edge_floor);
    }
    if (doc.contains("layout")) {
        const auto& s = doc.at("layout");
        reject_unknown(s, {"iterations", "weighted", "width", "height"}, "layout");
        read_field(s, "iterations", c.layout_iterations);
        read_field(s, "weighted", c.layout_weighted);
        read_field(s, "width", c.svg_width);
        read_field(s, "height", c.svg_height);
    }
    if (doc.contains("kinds")) {
        std::vector<std::string> names;
        read_field(doc, "kinds", names);
        c.kinds.clear();
        for (const auto& name : names) {
            const auto kind = parse_kind(name);
            if (!kind) throw ConfigError("unknown element kind '" + name + "' in 'kinds'");
            if (std::find(c.kinds.begin(), c.kinds.end(), *kind) == c.kinds.end()) c.kinds.push_back(*kind);
        }
        if (c.kinds.empty()) throw ConfigError("'kinds' must name at least one element kind");
    }
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception&) {
        throw ConfigError("cannot read config " + path.string());
    }
    return parse_config(text, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
}

fs::path corpus_path(const PipelineConfig& c, const fs::path& out) {
    if (c.corpus) return *c.corpus;
    return out / "corpus" / "tweets.jsonl";
}

fs::path seeds_path(const PipelineConfig& c, const fs::path& out) {
    if (c.seeds) return *c.seeds;
    if (c.synth) return out / "corpus" / "seeds.tsv";
    throw StageError("propagate", "no seed file configured");
}

// ---------------------------------------------------------------------------
// stages

namespace {

class Hasher {
public:
    Hasher() : ctx_(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr); }
    ~Hasher() { EVP_MD_CTX_free(ctx_); }
    Hasher(const Hasher&) = delete;
    Hasher& operator=(const Hasher&) = delete;

    void add(std::string_view s) {
        const std::uint64_t n = s.size();
        EVP_DigestUpdate(ctx_, &n, sizeof n);
        EVP_DigestUpdate(ctx_, s.data(), s.size());
    }
    void add_file(const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read " + path.string());
        char buf[1 << 16];
        while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx_, buf, static_cast<std::size_t>(in.gcount()));
    }
    std::string hex() {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_, digest, &len);
        std::string out;
        for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
        return out;
    }

private:
    EVP_MD_CTX* ctx_;
};

struct Stage {
    std::string name;
    fs::path dir;                                  // output directory, holds the stamp
    std::vector<fs::path> inputs;
    std::string params;
    std::vector<fs::path> outputs;
    std::function<void()> run;
};

std::string kind_file(std::string_view prefix, ElementKind kind, std::string_view ext) {
    return fmt::format("{}_{}.{}", prefix, kind_name(kind), ext);
}

std::string kinds_param(const std::vector<ElementKind>& kinds) {
    std::string out;
    for (auto k : kinds) out += kind_name(k);
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += s + "\x1f";
    return out;
}

Stage make_stage(const std::string& name, const PipelineConfig& c, const fs::path& out) {
    const fs::path ingest_dir = out / "ingest";
    const fs::path profiles = ingest_dir / "profiles.tsv";
    const std::vector<fs::path> snapshot_files = {profiles, ingest_dir / "retweeted.tsv", ingest_dir / "audience.tsv",
                                                  ingest_dir / "display.tsv"};
    const fs::path propagated = out / "propagate" / "labels.tsv";
    const fs::path model_path = out / "model" / "model.bin";
    const fs::path final_labels = out / "classify" / "labels.tsv";

    Stage s;
    s.name = name;

    if (name == "synth") {
        if (!c.synth) throw StageError(name, "config has no synth section");
        s.dir = out / "corpus";
        s.params = synth::config_to_json(*c.synth);
        s.outputs = {s.dir / "tweets.jsonl", s.dir / "truth.tsv", s.dir / "seeds.tsv", s.dir / "day_plan.tsv"};
        s.run = [cfg = *c.synth, dir = s.dir] { synth::write_corpus(synth::generate(cfg), dir); };
    } else if (name == "ingest") {
        s.dir = ingest_dir;
        s.inputs = {corpus_path(c, out)};
        s.params = fmt::format("filter={} keywords={} since={} until={}", c.keyword_filter, join(c.keywords),
                               c.since.value_or("-"), c.until.value_or("-"));
        s.outputs = snapshot_files;
        s.outputs.push_back(ingest_dir / "daily_counts.tsv");
        s.outputs.push_back(ingest_dir / "ingest_summary.tsv");
        s.run = [c, corpus = corpus_path(c, out), dir = s.dir] {
            ingest::IngestOptions opts;
            if (!c.keywords.empty()) opts.keywords = c.keywords;
            opts.apply_keyword_filter = c.keyword_filter;
            if (c.since) opts.since = ingest::parse_rfc3339(*c.since);
            if (c.until) opts.until = ingest::parse_rfc3339(*c.until);
            const auto corpus_data = ingest::ingest_file(corpus, opts);
            const auto& st = corpus_data.stats;
            for (const auto& e : st.errors) spdlog::warn("ingest: {}", e.what());
            const auto snap = graph::build_profiles(corpus_data.tweets);
            graph::write_snapshot(snap, dir);
            tsv::write_atomically(dir / "daily_counts.tsv",
                                  report::serialize_daily_counts(report::daily_counts(corpus_data.tweets)));
            std::size_t dropped_urls = 0;
            for (const auto& t : corpus_data.tweets) ingest::extract_elements(t, &dropped_urls);
            tsv::write_atomically(
                dir / "ingest_summary.tsv",
                fmt::format("metric\tvalue\ntotal_lines\t{}\nparsed_lines\t{}\nskipped_lines\t{}\nduplicate_tweets\t{}\n"
                            "filtered_out\t{}\nout_of_range\t{}\nkept_tweets\t{}\ndropped_urls\t{}\nusers\t{}\n",
                            st.total_lines, st.parsed_lines, st.skipped_lines, st.duplicate_tweets, st.filtered_out,
                            st.out_of_range, corpus_data.tweets.size(), dropped_urls, snap.profiles.size()));
            spdlog::info("ingest: {} lines, {} kept, {} skipped, {} users", st.total_lines, corpus_data.tweets.size(),
                         st.skipped_lines, snap.profiles.size());
        };
    } else if (name == "propagate") {
        s.dir = out / "propagate";
        s.inputs = snapshot_files;
        s.inputs.push_back(seeds_path(c, out));
        s.params = fmt::format("{} {} {}", c.propagation.supp_threshold, c.propagation.opp_threshold,
                               c.propagation.max_iterations);
        s.outputs = {propagated, s.dir / "trace.tsv"};
        s.run = [c, ingest_dir, seeds = seeds_path(c, out), dir = s.dir] {
            const auto snap = graph::read_snapshot(ingest_dir);
            labeling::LabelMap initial;
            try {
                initial = labeling::load_seeds(seeds, &snap.profiles);
            } catch (const ConfigError& e) {
                throw StageError("propagate", std::string("seed configuration error: ") + e.what());
            }
            if (initial.empty()) throw StageError("propagate", "seed file holds no labels");
            const auto result = labeling::propagate(snap.profiles, snap.audiences, initial, c.propagation);
            labeling::write_labels(result.labels, dir / "labels.tsv");
            labeling::write_trace(result.trace, dir / "trace.tsv");
            spdlog::info("propagate: {} labels after {} rounds{}", result.labels.size(), result.trace.size(),
                         result.converged ? "" : " (iteration cap reached)");
        };
    } else if (name == "train") {
        s.dir = out / "model";
        s.inputs = {profiles, propagated};
        s.params = fmt::format("{} {} {} {}", c.dim, c.epochs, c.learning_rate, derive_seed(c.seed, "classifier"));
        s.outputs = {model_path};
        s.run = [c, ingest_dir, propagated, model_path] {
            const auto snap = graph::read_snapshot(ingest_dir);
            const auto labels = labeling::read_labels(propagated);
            const auto examples = classifier::training_examples(snap.profiles, labels);
            classifier::Hyperparams hp{c.dim, c.epochs, c.learning_rate, derive_seed(c.seed, "classifier")};
            const auto model = classifier::train(examples, hp);
            classifier::write_model(model, model_path);
            spdlog::info("train: {} examples, vocabulary {}", examples.size(), model.vocab.size());
        };
    } else if (name == "classify") {
        s.dir = out / "classify";
        s.inputs = {profiles, propagated, model_path};
        s.params = fmt::format("{} {}", c.expansion.min_distinct_accounts, c.expansion.confidence_threshold);
        s.outputs = {final_labels};
        s.run = [c, ingest_dir, propagated, model_path, final_labels] {
            const auto snap = graph::read_snapshot(ingest_dir);
            const auto labels = labeling::read_labels(propagated);
            const auto model = classifier::read_model(model_path);
            const auto expanded = classifier::expand_labels(model, snap.profiles, labels, c.expansion);
            labeling::write_labels(expanded, final_labels);
            spdlog::info("classify: {} labels ({} added)", expanded.size(), expanded.size() - labels.size());
        };
    } else if (name == "valence") {
        s.dir = out / "valence";
        s.inputs = {profiles, final_labels};
        s.params = std::to_string(c.min_support) + kinds_param(c.kinds);
        for (auto kind : c.kinds) {
            s.outputs.push_back(s.dir / kind_file("valence", kind, "tsv"));
            s.outputs.push_back(s.dir / kind_file("histogram", kind, "tsv"));
        }
        s.run = [c, ingest_dir, final_labels, dir = s.dir] {
            const auto snap = graph::read_snapshot(ingest_dir);
            const auto labels = labeling::read_labels(final_labels);
            for (auto kind : c.kinds) {
                const auto table = valence::build_valence_table(snap.profiles, labels, kind, c.min_support);
                tsv::write_atomically(dir / kind_file("valence", kind, "tsv"), valence::serialize_table(table));
                tsv::write_atomically(dir / kind_file("histogram", kind, "tsv"),
                                      valence::serialize_histogram(valence::bin_histogram(table)));
                spdlog::info("valence: {} {} elements scored", table.rows.size(), kind_name(kind));
            }
        };
    } else if (name == "similarity") {
        s.dir = out / "similarity";
        s.inputs = {profiles, final_labels};
        s.params = fmt::format("{} {} {} {} {}", c.min_elements, c.sample, c.edge_floor, c.seed, kinds_param(c.kinds));
        for (auto kind : c.kinds) {
            s.outputs.push_back(s.dir / kind_file("nodes", kind, "tsv"));
            s.outputs.push_back(s.dir / kind_file("edges", kind, "tsv"));
        }
        s.run = [c, ingest_dir, final_labels, dir = s.dir] {
            const auto snap = graph::read_snapshot(ingest_dir);
            const auto labels = labeling::read_labels(final_labels);
            for (auto kind : c.kinds) {
                const auto vectors = similarity::build_vectors(snap.profiles, kind, c.min_elements);
                const auto sampled = similarity::sample_users(
                    vectors, labels, c.sample, derive_seed(c.seed, "similarity/" + std::string(kind_name(kind))));
                const auto g = similarity::build_similarity_graph(sampled, labels, c.edge_floor);
                tsv::write_atomically(dir / kind_file("nodes", kind, "tsv"), similarity::serialize_nodes(g));
                tsv::write_atomically(dir / kind_file("edges", kind, "tsv"), similarity::serialize_edges(g));
                spdlog::info("similarity: {} {} nodes, {} edges", kind_name(kind), g.nodes.size(), g.edges.size());
            }
        };
    } else if (name == "layout") {
        s.dir = out / "layout";
        for (auto kind : c.kinds) {
            s.inputs.push_back(out / "similarity" / kind_file("nodes", kind, "tsv"));
            s.inputs.push_back(out / "similarity" / kind_file("edges", kind, "tsv"));
            s.outputs.push_back(s.dir / kind_file("coords", kind, "tsv"));
            s.outputs.push_back(s.dir / kind_file("layout", kind, "svg"));
        }
        s.params = fmt::format("{} {} {} {} {} {}", c.layout_iterations, c.layout_weighted, c.svg_width, c.svg_height,
                               c.seed, kinds_param(c.kinds));
        s.run = [c, out, dir = s.dir] {
            for (auto kind : c.kinds) {
                const auto g = similarity::read_graph(out / "similarity" / kind_file("nodes", kind, "tsv"),
                                                      out / "similarity" / kind_file("edges", kind, "tsv"));
                layout::LayoutConfig lc;
                lc.iterations = c.layout_iterations;
                lc.weighted = c.layout_weighted;
                lc.seed = derive_seed(c.seed, "layout/" + std::string(kind_name(kind)));
                const auto points = layout::fruchterman_reingold(g, lc);
                tsv::write_atomically(dir / kind_file("coords", kind, "tsv"), layout::serialize_coords(points));
                tsv::write_atomically(dir / kind_file("layout", kind, "svg"),
                                      layout::render_svg(points, {c.svg_width, c.svg_height, 10}));
                spdlog::info("layout: {} {} points", kind_name(kind), points.size());
            }
        };
    } else if (name == "report") {
        s.dir = out / "report";
        s.inputs = snapshot_files;
        s.inputs.push_back(ingest_dir / "daily_counts.tsv");
        s.inputs.push_back(final_labels);
        for (auto kind : c.kinds) s.inputs.push_back(out / "valence" / kind_file("valence", kind, "tsv"));
        if (c.annotations) s.inputs.push_back(*c.annotations);
        s.params = std::to_string(c.top_k) + kinds_param(c.kinds);
        s.outputs = {s.dir / "daily_counts.tsv", s.dir / "stage_summary.tsv"};
        for (auto kind : c.kinds) {
            if (kind == ElementKind::Website) s.outputs.push_back(s.dir / "annotated_websites.tsv");
            s.outputs.push_back(s.dir / kind_file("top" + std::to_string(c.top_k), kind, "tsv"));
            s.outputs.push_back(s.dir / kind_file("histogram", kind, "tsv"));
        }
        s.run = [c, out, ingest_dir, final_labels, dir = s.dir] {
            const auto snap = graph::read_snapshot(ingest_dir);
            const auto labels = labeling::read_labels(final_labels);
            tsv::write_atomically(dir / "daily_counts.tsv",
                                  report::serialize_daily_counts(report::read_daily_counts(ingest_dir / "daily_counts.tsv")));
            tsv::write_atomically(dir / "stage_summary.tsv",
                                  report::serialize_stage_summary(report::stage_summary(labels, snap.profiles)));
            for (auto kind : c.kinds) {
                const auto table = valence::read_table(out / "valence" / kind_file("valence", kind, "tsv"), kind);
                tsv::write_atomically(dir / kind_file("top" + std::to_string(c.top_k), kind, "tsv"),
                                      report::serialize_top_k(valence::top_k_per_bin(table, c.top_k), snap.display));
                tsv::write_atomically(dir / kind_file("histogram", kind, "tsv"),
                                      valence::serialize_histogram(valence::bin_histogram(table)));
                if (kind == ElementKind::Website) {
                    std::vector<std::string> warnings;
                    std::map<std::string, report::Annotation> annotations;
                    if (c.annotations) annotations = report::parse_annotations(read_file(*c.annotations), warnings);
                    auto joined = report::join_annotations(table, annotations, snap.display);
                    for (const auto& w : warnings) spdlog::warn("report: {}", w);
                    for (const auto& w : joined.warnings) spdlog::warn("report: {}", w);
                    tsv::write_atomically(dir / "annotated_websites.tsv", report::serialize_annotated(joined));
                }
            }
        };
    } else {
        throw StageError(name, "unknown stage");
    }
    return s;
}

}  // namespace

const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names = {"synth",   "ingest",     "propagate", "train", "classify",
                                                   "valence", "similarity", "layout",    "report"};
    return names;
}

StageOutcome run_stage(const std::string& name, const PipelineConfig& config, const fs::path& out_dir, bool force) {
    try {
        const Stage stage = make_stage(name, config, out_dir);
        for (const auto& in : stage.inputs)
            if (!fs::exists(in)) throw StageError(name, "missing input " + in.string());

        Hasher h;
        h.add(stage.name);
        h.add(stage.params);
        for (const auto& in : stage.inputs) {
            h.add(in.filename().string());
            h.add_file(in);
        }
        const std::string digest = h.hex();
        const fs::path stamp = stage.dir / ".stamp";

        if (!force && fs::exists(stamp)) {
            const bool outputs_present =
                std::all_of(stage.outputs.begin(), stage.outputs.end(), [](const fs::path& p) { return fs::exists(p); });
            if (outputs_present && read_file(stamp) == digest + "\n") {
                spdlog::info("{}: up to date, skipped", name);
                return {name, true};
            }
        }
        fs::create_directories(stage.dir);
        fs::remove(stamp);
        stage.run();
        tsv::write_atomically(stamp, digest + "\n");
        return {name, false};
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::vector<StageOutcome> run_pipeline(const PipelineConfig& config, const fs::path& out_dir) {
    if (!config.corpus && !config.synth) throw ConfigError("config needs either 'corpus' or 'synth'");
    std::vector<StageOutcome> outcomes;
    for (const auto& name : stage_names()) {
        if (name == "synth" && !config.synth) continue;
        outcomes.push_back(run_stage(name, config, out_dir));
    }
    return outcomes;
}

}  // namespace polarimeter::pipeline
