#include "polarimeter/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "polarimeter/parallel.hpp"
#include "polarimeter/random.hpp"
#include "polarimeter/tsv.hpp"

namespace polarimeter::classifier {

namespace {

int class_index(Stance s) {
    if (s == Stance::Supp) return 0;
    if (s == Stance::Opp) return 1;
    throw std::invalid_argument("training labels must be SUPP or OPP");
}

std::array<double, 2> softmax(double z0, double z1) {
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m);
    const double e1 = std::exp(z1 - m);
    const double sum = e0 + e1;
    return {e0 / sum, e1 / sum};
}

std::array<double, 2> logits(const Model& m, std::span<const double> h) {
    std::array<double, 2> z{0.0, 0.0};
    for (std::size_t j = 0; j < h.size(); ++j) {
        z[0] += h[j] * m.output_weights[2 * j];
        z[1] += h[j] * m.output_weights[2 * j + 1];
    }
    return z;
}

/// In-vocabulary (row, count) pairs in key order.
std::vector<std::pair<std::uint32_t, double>> active_rows(const Model& m, const FeatureBag& bag, double& total) {
    std::vector<std::pair<std::uint32_t, double>> rows;
    total = 0.0;
    for (const auto& [feature, count] : bag) {
        const auto it = m.vocab.find(feature);
        if (it == m.vocab.end() || count == 0) continue;
        rows.emplace_back(it->second, static_cast<double>(count));
        total += static_cast<double>(count);
    }
    return rows;
}

void hidden_from_rows(const Model& m, const std::vector<std::pair<std::uint32_t, double>>& rows, double total,
                      std::vector<double>& h) {
    const std::size_t d = m.dim();
    h.assign(d, 0.0);
    for (const auto& [row, count] : rows) {
        const double w = count / total;
        const double* e = m.embeddings.data() + static_cast<std::size_t>(row) * d;
        for (std::size_t j = 0; j < d; ++j) h[j] += w * e[j];
    }
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}
    std::uint64_t uint(int width) {
        need(width);
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) v |= std::uint64_t(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += width;
        return v;
    }
    std::string_view bytes(std::size_t n) {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw std::runtime_error("model file truncated");
    }
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

constexpr std::string_view kMagic = "PLMD";
constexpr std::uint32_t kVersion = 1;

}  // namespace

FeatureBag feature_bag(const graph::UserProfile& profile) {
    FeatureBag bag;
    for (const auto& [key, count] : profile.element_counts)
        if (key.kind == ElementKind::RetweetedAccount) bag.emplace(key.key, count);
    return bag;
}

void Hyperparams::validate() const {
    if (dim == 0) throw std::invalid_argument("embedding dimension must be positive");
    if (epochs == 0) throw std::invalid_argument("epochs must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("learning rate must be positive and finite");
}

std::optional<std::vector<double>> Model::hidden(const FeatureBag& bag) const {
    double total = 0.0;
    const auto rows = active_rows(*this, bag, total);
    if (rows.empty()) return std::nullopt;
    std::vector<double> h;
    hidden_from_rows(*this, rows, total, h);
    return h;
}

std::optional<std::array<double, 2>> Model::probabilities(const FeatureBag& bag) const {
    const auto h = hidden(bag);
    if (!h) return std::nullopt;
    const auto z = logits(*this, *h);
    return softmax(z[0], z[1]);
}

std::optional<Prediction> predict(const Model& model, const FeatureBag& bag) {
    if (bag.empty()) throw std::invalid_argument("cannot classify an empty feature bag");
    const auto p = model.probabilities(bag);
    if (!p) return std::nullopt;
    Prediction out;
    out.probabilities = *p;
    out.stance = (*p)[0] >= (*p)[1] ? Stance::Supp : Stance::Opp;
    out.confidence = std::max((*p)[0], (*p)[1]);
    return out;
}

double example_loss(const Model& model, const FeatureBag& bag, Stance label) {
    const auto p = model.probabilities(bag);
    if (!p) throw std::invalid_argument("bag has no in-vocabulary feature");
    return -std::log((*p)[class_index(label)]);
}

LossGradient loss_and_gradient(const Model& model, const FeatureBag& bag, Stance label) {
    const std::size_t d = model.dim();
    double total = 0.0;
    const auto rows = active_rows(model, bag, total);
    if (rows.empty()) throw std::invalid_argument("bag has no in-vocabulary feature");
    std::vector<double> h;
    hidden_from_rows(model, rows, total, h);
    const auto z = logits(model, h);
    const auto p = softmax(z[0], z[1]);
    const int y = class_index(label);

    LossGradient g;
    g.loss = -std::log(p[y]);
    const double g0 = p[0] - (y == 0 ? 1.0 : 0.0);
    const double g1 = p[1] - (y == 1 ? 1.0 : 0.0);
    g.d_output_weights.assign(d * 2, 0.0);
    g.d_embeddings.assign(model.embeddings.size(), 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        g.d_output_weights[2 * j] = h[j] * g0;
        g.d_output_weights[2 * j + 1] = h[j] * g1;
    }
    for (const auto& [row, count] : rows) {
        const double w = count / total;
        double* de = g.d_embeddings.data() + static_cast<std::size_t>(row) * d;
        for (std::size_t j = 0; j < d; ++j)
            de[j] += w * (model.output_weights[2 * j] * g0 + model.output_weights[2 * j + 1] * g1);
    }
    return g;
}

Model train(std::span<const Example> examples, const Hyperparams& hp) {
    hp.validate();
    bool seen[2] = {false, false};
    Model m;
    m.hyperparams = hp;
    for (const auto& ex : examples) {
        if (ex.bag.empty()) throw std::invalid_argument("training example with empty feature bag");
        seen[class_index(ex.label)] = true;
        for (const auto& [feature, count] : ex.bag) m.vocab.emplace(feature, 0);
    }
    if (!seen[0] || !seen[1]) throw std::invalid_argument("training data must contain both SUPP and OPP examples");
    std::uint32_t next = 0;
    for (auto& [feature, index] : m.vocab) index = next++;

    const std::size_t d = hp.dim;
    Rng rng(hp.seed);
    m.embeddings.resize(m.vocab.size() * d);
    const double bound = 1.0 / static_cast<double>(d);
    for (auto& e : m.embeddings) e = (2.0 * uniform01(rng) - 1.0) * bound;
    m.output_weights.assign(d * 2, 0.0);

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const double total_steps = static_cast<double>(hp.epochs) * static_cast<double>(examples.size());
    std::size_t step = 0;
    std::vector<double> h, dh(d);
    for (std::uint32_t epoch = 0; epoch < hp.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[bounded(rng, i)]);
        for (const std::size_t idx : order) {
            const double lr = hp.learning_rate * (1.0 - static_cast<double>(step) / total_steps);
            ++step;
            const auto& ex = examples[idx];
            double total = 0.0;
            const auto rows = active_rows(m, ex.bag, total);
            hidden_from_rows(m, rows, total, h);
            const auto z = logits(m, h);
            const auto p = softmax(z[0], z[1]);
            const int y = class_index(ex.label);
            const double g0 = p[0] - (y == 0 ? 1.0 : 0.0);
            const double g1 = p[1] - (y == 1 ? 1.0 : 0.0);
            for (std::size_t j = 0; j < d; ++j) {
                dh[j] = m.output_weights[2 * j] * g0 + m.output_weights[2 * j + 1] * g1;
                m.output_weights[2 * j] -= lr * h[j] * g0;
                m.output_weights[2 * j + 1] -= lr * h[j] * g1;
            }
            for (const auto& [row, count] : rows) {
                const double w = lr * count / total;
                double* e = m.embeddings.data() + static_cast<std::size_t>(row) * d;
                for (std::size_t j = 0; j < d; ++j) e[j] -= w * dh[j];
            }
        }
    }
    return m;
}

std::vector<Example> training_examples(const graph::ProfileMap& profiles, const labeling::LabelMap& labels) {
    std::vector<Example> out;
    for (const auto& [id, label] : labels) {
        if (label.value != Stance::Supp && label.value != Stance::Opp) continue;
        const auto it = profiles.find(id);
        if (it == profiles.end()) continue;
        auto bag = feature_bag(it->second);
        if (bag.empty()) continue;
        out.push_back({std::move(bag), label.value});
    }
    return out;
}

labeling::LabelMap expand_labels(const Model& model, const graph::ProfileMap& profiles,
                                 const labeling::LabelMap& labels, const ExpansionConfig& config) {
    std::vector<const graph::UserProfile*> candidates;
    for (const auto& [id, p] : profiles) {
        if (labels.count(id)) continue;
        const auto accounts = p.distinct_elements(ElementKind::RetweetedAccount);
        if (accounts == 0 || accounts < config.min_distinct_accounts) continue;
        candidates.push_back(&p);
    }

    std::vector<std::optional<Prediction>> predictions(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) predictions[i] = predict(model, feature_bag(*candidates[i]));
    });

    labeling::LabelMap out = labels;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& pred = predictions[i];
        if (pred && pred->confidence > config.confidence_threshold)
            out[candidates[i]->user_id] = labeling::StanceLabel::classified(pred->stance);
    }
    return out;
}

std::string serialize_model(const Model& m) {
    std::string out;
    out += kMagic;
    put_u32(out, kVersion);
    put_u32(out, m.dim());
    put_u64(out, m.vocab.size());
    std::vector<const std::string*> by_index(m.vocab.size());
    for (const auto& [feature, index] : m.vocab) by_index.at(index) = &feature;
    for (const auto* feature : by_index) {
        put_u32(out, static_cast<std::uint32_t>(feature->size()));
        out += *feature;
    }
    for (double v : m.embeddings) put_u64(out, std::bit_cast<std::uint64_t>(v));
    for (double v : m.output_weights) put_u64(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

Model deserialize_model(std::string_view bytes) {
    Reader r(bytes);
    if (r.bytes(4) != kMagic) throw std::runtime_error("not a polarimeter model file");
    if (const auto version = r.uint(4); version != kVersion)
        throw std::runtime_error("unsupported model version " + std::to_string(version));
    Model m;
    m.hyperparams.dim = static_cast<std::uint32_t>(r.uint(4));
    if (m.hyperparams.dim == 0) throw std::runtime_error("model dimension is zero");
    const std::uint64_t vocab_size = r.uint(8);
    for (std::uint64_t i = 0; i < vocab_size; ++i) {
        const auto len = r.uint(4);
        if (!m.vocab.emplace(std::string(r.bytes(len)), static_cast<std::uint32_t>(i)).second)
            throw std::runtime_error("duplicate vocabulary entry in model file");
    }
    const std::size_t d = m.dim();
    m.embeddings.resize(vocab_size * d);
    for (auto& v : m.embeddings) v = std::bit_cast<double>(r.uint(8));
    m.output_weights.resize(d * 2);
    for (auto& v : m.output_weights) v = std::bit_cast<double>(r.uint(8));
    if (!r.done()) throw std::runtime_error("trailing bytes in model file");
    return m;
}

void write_model(const Model& model, const std::filesystem::path& path) {
    tsv::write_atomically(path, serialize_model(model));
}

Model read_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

}  // namespace polarimeter::classifier
