// Python bindings for the polarimeter core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "polarimeter/classifier.hpp"
#include "polarimeter/graph.hpp"
#include "polarimeter/ingest.hpp"
#include "polarimeter/labeling.hpp"
#include "polarimeter/pipeline.hpp"
#include "polarimeter/similarity.hpp"
#include "polarimeter/synth.hpp"
#include "polarimeter/valence.hpp"

namespace py = pybind11;
using namespace polarimeter;

namespace {

ElementKind kind_arg(const std::string& name) {
    const auto kind = parse_kind(name);
    if (!kind) throw py::value_error("unknown element kind '" + name + "'");
    return *kind;
}

Stance stance_arg(const std::string& name) {
    const auto s = parse_stance(name);
    if (!s) throw py::value_error("unknown stance '" + name + "'");
    return *s;
}

labeling::LabelMap labels_arg(const std::map<std::string, std::string>& labels) {
    labeling::LabelMap out;
    for (const auto& [user, stance] : labels) out[user] = labeling::StanceLabel::seed(stance_arg(stance));
    return out;
}

std::map<std::string, std::string> labels_out(const labeling::LabelMap& labels) {
    std::map<std::string, std::string> out;
    for (const auto& [user, label] : labels) out[user] = std::string(stance_name(label.value));
    return out;
}

// A corpus after ingest, with its profiles and retweet audiences.
struct PySnapshot {
    graph::Snapshot snap;
    ingest::IngestStats stats;
    std::size_t tweets = 0;
};

PySnapshot load_corpus(const std::filesystem::path& path, bool keyword_filter) {
    ingest::IngestOptions opts;
    opts.apply_keyword_filter = keyword_filter;
    auto corpus = ingest::ingest_file(path, opts);
    PySnapshot out;
    {
        py::gil_scoped_release release;
        out.snap = graph::build_profiles(corpus.tweets);
    }
    out.stats = corpus.stats;
    out.tweets = corpus.tweets.size();
    return out;
}

std::vector<py::tuple> valence_rows(const PySnapshot& s, const std::map<std::string, std::string>& labels,
                                    const std::string& kind, std::uint64_t min_support) {
    const auto table = valence::build_valence_table(s.snap.profiles, labels_arg(labels), kind_arg(kind), min_support);
    std::vector<py::tuple> rows;
    for (const auto& r : table.rows)
        rows.push_back(py::make_tuple(r.element.key, r.tf_supp, r.tf_opp, r.valence, std::string(valence::bin_name(r.bin))));
    return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stance labeling and polarization analysis for tweet corpora";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ingest::ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ingest::UrlError>(m, "UrlError", PyExc_ValueError);
    py::register_exception<pipeline::StageError>(m, "StageError", PyExc_RuntimeError);

    m.def("normalize_url", [](const std::string& url) {
        const auto key = ingest::normalize_url(url);
        return py::make_tuple(std::string(kind_name(key.kind)), key.key);
    }, py::arg("url"), "Returns (kind, key); raises UrlError for unusable URLs.");
    m.def("normalize_hashtag", &ingest::normalize_hashtag, py::arg("raw"));
    m.def("normalize_handle", &ingest::normalize_handle, py::arg("raw"));
    m.def("parse_tweet", [](const std::string& line) {
        const auto t = ingest::parse_tweet_line(line);
        std::vector<std::pair<std::string, std::string>> elements;
        for (const auto& e : ingest::extract_elements(t)) elements.emplace_back(std::string(kind_name(e.kind)), e.key);
        return elements;
    }, py::arg("line"), "Parses one JSON line and returns its (kind, key) elements.");
    m.def("default_keywords", &ingest::default_keywords);

    m.def("compute_valence", &valence::compute_valence, py::arg("tf_supp"), py::arg("total_supp"), py::arg("tf_opp"),
          py::arg("total_opp"));
    m.def("bin_of", [](double v) { return std::string(valence::bin_name(valence::bin_of(v))); }, py::arg("valence"));

    m.def("cosine", [](const std::map<std::string, std::uint64_t>& a, const std::map<std::string, std::uint64_t>& b) {
        const auto u = similarity::UserVector::from_counts("a", ElementKind::Hashtag, {a.begin(), a.end()});
        const auto v = similarity::UserVector::from_counts("b", ElementKind::Hashtag, {b.begin(), b.end()});
        return similarity::cosine(u, v);
    }, py::arg("a"), py::arg("b"), "Cosine of two element-count vectors after frequency normalization.");

    m.def("synth", [](const std::string& config_json, const std::filesystem::path& out_dir) {
        const auto cfg = synth::config_from_json(config_json.empty() ? "{}" : config_json);
        py::gil_scoped_release release;
        const auto corpus = synth::generate(cfg);
        synth::write_corpus(corpus, out_dir);
        return corpus.tweets.size();
    }, py::arg("config_json") = "{}", py::arg("out_dir"), "Writes a synthetic corpus; returns the tweet count.");

    py::class_<PySnapshot>(m, "Snapshot")
        .def_static("from_corpus", &load_corpus, py::arg("path"), py::arg("keyword_filter") = true)
        .def_property_readonly("tweet_count", [](const PySnapshot& s) { return s.tweets; })
        .def_property_readonly("skipped_lines", [](const PySnapshot& s) { return s.stats.skipped_lines; })
        .def("users", [](const PySnapshot& s) {
            std::vector<std::string> ids;
            for (const auto& [id, p] : s.snap.profiles) ids.push_back(id);
            return ids;
        })
        .def("element_counts", [](const PySnapshot& s, const std::string& user, const std::string& kind) {
            const auto it = s.snap.profiles.find(user);
            if (it == s.snap.profiles.end()) throw py::key_error(user);
            const auto k = kind_arg(kind);
            std::map<std::string, std::uint64_t> out;
            for (const auto& [key, n] : it->second.element_counts)
                if (key.kind == k) out[key.key] = n;
            return out;
        }, py::arg("user"), py::arg("kind"))
        .def("load_seeds", [](const PySnapshot& s, const std::filesystem::path& path) {
            return labels_out(labeling::load_seeds(path, &s.snap.profiles));
        }, py::arg("path"))
        .def("propagate", [](const PySnapshot& s, const std::map<std::string, std::string>& seeds,
                             std::uint32_t supp_threshold, std::uint32_t opp_threshold, std::uint32_t max_iterations) {
            labeling::PropagationConfig cfg{supp_threshold, opp_threshold, max_iterations};
            cfg.validate();
            const auto result = labeling::propagate(s.snap.profiles, s.snap.audiences, labels_arg(seeds), cfg);
            std::vector<py::tuple> trace;
            for (const auto& t : result.trace) trace.push_back(py::make_tuple(t.iteration, t.added_supp, t.added_opp));
            return py::make_tuple(labels_out(result.labels), trace, result.converged);
        }, py::arg("seeds"), py::arg("supp_threshold") = 15, py::arg("opp_threshold") = 7, py::arg("max_iterations") = 20,
           "Returns (labels, trace, converged).")
        .def("expand", [](const PySnapshot& s, const std::map<std::string, std::string>& labels, std::uint32_t dim,
                          std::uint32_t epochs, std::uint64_t seed) {
            const auto base = labels_arg(labels);
            const auto examples = classifier::training_examples(s.snap.profiles, base);
            classifier::Hyperparams hp;
            hp.dim = dim;
            hp.epochs = epochs;
            hp.seed = seed;
            const auto model = classifier::train(examples, hp);
            return labels_out(classifier::expand_labels(model, s.snap.profiles, base, {}));
        }, py::arg("labels"), py::arg("dim") = 16, py::arg("epochs") = 20, py::arg("seed") = 1,
           "Trains the account classifier on the labels and returns the expanded label set.")
        .def("valence", &valence_rows, py::arg("labels"), py::arg("kind"), py::arg("min_support") = 100,
             "Rows of (key, tf_supp, tf_opp, valence, bin).");

    m.def("run_pipeline", [](const std::filesystem::path& config, const std::filesystem::path& out_dir) {
        const auto cfg = pipeline::load_config(config);
        std::vector<std::pair<std::string, bool>> out;
        py::gil_scoped_release release;
        for (const auto& o : pipeline::run_pipeline(cfg, out_dir)) out.emplace_back(o.name, o.skipped);
        return out;
    }, py::arg("config"), py::arg("out_dir"), "Runs every stage; returns (stage, skipped) pairs.");
    m.def("run_stage", [](const std::string& name, const std::filesystem::path& config,
                          const std::filesystem::path& out_dir, bool force) {
        const auto cfg = pipeline::load_config(config);
        py::gil_scoped_release release;
        return pipeline::run_stage(name, cfg, out_dir, force).skipped;
    }, py::arg("name"), py::arg("config"), py::arg("out_dir"), py::arg("force") = false);
    m.def("stage_names", &pipeline::stage_names);
}
