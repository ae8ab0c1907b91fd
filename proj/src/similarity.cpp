#include "polarimeter/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "polarimeter/parallel.hpp"
#include "polarimeter/random.hpp"
#include "polarimeter/tsv.hpp"

namespace polarimeter::similarity {

UserVector UserVector::from_counts(std::string user_id, ElementKind kind,
                                   const std::vector<std::pair<std::string, std::uint64_t>>& counts) {
    UserVector v;
    v.user_id = std::move(user_id);
    v.kind = kind;
    std::uint64_t sum = 0;
    for (const auto& [key, c] : counts) sum += c;
    if (sum == 0) throw std::invalid_argument("user vector needs at least one positive count");
    const double total = static_cast<double>(sum);
    for (const auto& [key, c] : counts)
        if (c > 0) v.weights.emplace_back(key, static_cast<double>(c) / total);
    std::sort(v.weights.begin(), v.weights.end());
    double sq = 0.0;
    for (const auto& [key, w] : v.weights) sq += w * w;
    v.norm = std::sqrt(sq);
    return v;
}

std::vector<UserVector> build_vectors(const graph::ProfileMap& profiles, ElementKind kind, std::size_t min_elements) {
    std::vector<UserVector> out;
    std::vector<std::pair<std::string, std::uint64_t>> counts;
    for (const auto& [id, p] : profiles) {
        counts.clear();
        for (const auto& [key, n] : p.element_counts)
            if (key.kind == kind && n > 0) counts.emplace_back(key.key, n);
        if (counts.empty() || counts.size() < min_elements) continue;
        out.push_back(UserVector::from_counts(id, kind, counts));
    }
    return out;
}

double cosine(const UserVector& u, const UserVector& v) {
    if (u.kind != v.kind) throw std::invalid_argument("cosine of vectors over different element kinds");
    double dot = 0.0;
    auto a = u.weights.begin();
    auto b = v.weights.begin();
    while (a != u.weights.end() && b != v.weights.end()) {
        if (a->first < b->first) {
            ++a;
        } else if (b->first < a->first) {
            ++b;
        } else {
            dot += a->second * b->second;
            ++a;
            ++b;
        }
    }
    return std::min(1.0, dot / (u.norm * v.norm));
}

std::vector<UserVector> sample_users(std::span<const UserVector> vectors, const labeling::LabelMap& labels,
                                     std::size_t n, std::uint64_t seed) {
    std::vector<const UserVector*> eligible;
    for (const auto& v : vectors) {
        const auto s = labeling::stance_of(labels, v.user_id);
        if (s == Stance::Supp || s == Stance::Opp) eligible.push_back(&v);
    }
    std::sort(eligible.begin(), eligible.end(),
              [](const UserVector* a, const UserVector* b) { return a->user_id < b->user_id; });

    const std::size_t take = std::min(n, eligible.size());
    Rng rng(seed);
    for (std::size_t i = 0; i < take; ++i) std::swap(eligible[i], eligible[i + bounded(rng, eligible.size() - i)]);
    eligible.resize(take);
    std::sort(eligible.begin(), eligible.end(),
              [](const UserVector* a, const UserVector* b) { return a->user_id < b->user_id; });

    std::vector<UserVector> out;
    out.reserve(take);
    for (const auto* v : eligible) out.push_back(*v);
    return out;
}

namespace {

struct Posting {
    std::uint32_t node;
    double weight;
};

/// Nonzero dot products for pairs i < j, grouped by row i. Within a row, products are added in
/// the key order of the shared elements, which is also the order cosine() uses.
class PairAccumulator {
public:
    explicit PairAccumulator(std::span<const UserVector> vectors) : vectors_(vectors) {
        std::map<std::string_view, std::uint32_t> ids;
        for (const auto& v : vectors)
            for (const auto& [key, w] : v.weights) ids.emplace(key, 0);
        std::uint32_t next = 0;
        for (auto& [key, id] : ids) id = next++;

        rows_.resize(vectors.size());
        postings_.resize(ids.size());
        for (std::uint32_t i = 0; i < vectors.size(); ++i) {
            for (const auto& [key, w] : vectors[i].weights) {
                const auto id = ids.find(key)->second;
                rows_[i].push_back({id, w});
                postings_[id].push_back({i, w});
            }
        }
    }

    /// fn(i, j, cosine) for every pair with a shared element, rows in parallel chunks.
    template <typename Fn>
    void for_each_row(std::size_t begin, std::size_t end, Fn&& fn) const {
        std::vector<double> acc(vectors_.size(), 0.0);
        std::vector<std::uint32_t> touched;
        for (std::size_t i = begin; i < end; ++i) {
            touched.clear();
            for (const auto& [key, wi] : rows_[i]) {
                const auto& list = postings_[key];
                auto it = std::upper_bound(list.begin(), list.end(), static_cast<std::uint32_t>(i),
                                           [](std::uint32_t n, const Posting& p) { return n < p.node; });
                for (; it != list.end(); ++it) {
                    if (acc[it->node] == 0.0) touched.push_back(it->node);
                    acc[it->node] += wi * it->weight;
                }
            }
            std::sort(touched.begin(), touched.end());
            for (const auto j : touched) {
                const double c = std::min(1.0, acc[j] / (vectors_[i].norm * vectors_[j].norm));
                fn(static_cast<std::uint32_t>(i), j, c);
                acc[j] = 0.0;
            }
        }
    }

    std::size_t size() const { return vectors_.size(); }

private:
    struct Entry {
        std::uint32_t key;
        double weight;
    };
    std::span<const UserVector> vectors_;
    std::vector<std::vector<Entry>> rows_;
    std::vector<std::vector<Posting>> postings_;
};

void check_kinds(std::span<const UserVector> vectors) {
    for (const auto& v : vectors)
        if (v.kind != vectors.front().kind) throw std::invalid_argument("vectors mix element kinds");
}

}  // namespace

SimilarityGraph build_similarity_graph(std::span<const UserVector> sampled, const labeling::LabelMap& labels,
                                       double edge_floor) {
    SimilarityGraph g;
    if (sampled.empty()) return g;
    check_kinds(sampled);
    for (const auto& v : sampled) g.nodes.push_back({v.user_id, labeling::stance_of(labels, v.user_id)});

    PairAccumulator pairs(sampled);
    const std::size_t n = sampled.size();
    std::vector<std::vector<Edge>> per_row(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        if (edge_floor <= 0.0) {
            // Complete graph: start every row with explicit zero edges, then overwrite.
            for (std::size_t i = begin; i < end; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    per_row[i].push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 0.0});
            pairs.for_each_row(begin, end, [&](std::uint32_t i, std::uint32_t j, double c) {
                per_row[i][j - i - 1].weight = c;
            });
        } else {
            pairs.for_each_row(begin, end, [&](std::uint32_t i, std::uint32_t j, double c) {
                if (c >= edge_floor) per_row[i].push_back({i, j, c});
            });
        }
    });
    for (auto& row : per_row) g.edges.insert(g.edges.end(), row.begin(), row.end());
    return g;
}

GroupCosine group_cosine_means(std::span<const UserVector> sampled, const labeling::LabelMap& labels) {
    GroupCosine out;
    if (sampled.size() < 2) return out;
    check_kinds(sampled);
    std::vector<Stance> stance(sampled.size());
    std::size_t supp = 0, opp = 0;
    for (std::size_t i = 0; i < sampled.size(); ++i) {
        stance[i] = labeling::stance_of(labels, sampled[i].user_id);
        supp += stance[i] == Stance::Supp;
        opp += stance[i] == Stance::Opp;
    }
    out.intra_pairs = supp * (supp - (supp > 0)) / 2 + opp * (opp - (opp > 0)) / 2;
    out.inter_pairs = supp * opp;

    PairAccumulator pairs(sampled);
    double intra = 0.0, inter = 0.0;
    pairs.for_each_row(0, sampled.size(), [&](std::uint32_t i, std::uint32_t j, double c) {
        if (stance[i] == Stance::Unlabeled || stance[j] == Stance::Unlabeled) return;
        (stance[i] == stance[j] ? intra : inter) += c;
    });
    if (out.intra_pairs) out.intra_mean = intra / static_cast<double>(out.intra_pairs);
    if (out.inter_pairs) out.inter_mean = inter / static_cast<double>(out.inter_pairs);
    return out;
}

std::string serialize_edges(const SimilarityGraph& g) {
    std::string out = "u\tv\tweight\n";
    for (const auto& e : g.edges)
        out += g.nodes[e.u].user_id + '\t' + g.nodes[e.v].user_id + '\t' + tsv::fixed9(e.weight) + '\n';
    return out;
}

std::string serialize_nodes(const SimilarityGraph& g) {
    std::string out = "user_id\tstance\n";
    for (const auto& n : g.nodes) {
        out += n.user_id;
        out += '\t';
        out += stance_name(n.stance);
        out += '\n';
    }
    return out;
}

SimilarityGraph read_graph(const std::filesystem::path& nodes_path, const std::filesystem::path& edges_path) {
    SimilarityGraph g;
    std::unordered_map<std::string, std::uint32_t> index;
    const auto node_lines = tsv::read_lines(nodes_path);
    for (std::size_t i = 1; i < node_lines.size(); ++i) {
        if (node_lines[i].empty()) continue;
        const auto f = tsv::split(node_lines[i]);
        const auto stance = f.size() == 2 ? parse_stance(f[1]) : std::nullopt;
        if (!stance) throw std::runtime_error(nodes_path.string() + ": malformed row " + std::to_string(i + 1));
        index.emplace(std::string(f[0]), static_cast<std::uint32_t>(g.nodes.size()));
        g.nodes.push_back({std::string(f[0]), *stance});
    }
    const auto edge_lines = tsv::read_lines(edges_path);
    for (std::size_t i = 1; i < edge_lines.size(); ++i) {
        if (edge_lines[i].empty()) continue;
        const auto f = tsv::split(edge_lines[i]);
        if (f.size() != 3) throw std::runtime_error(edges_path.string() + ": malformed row " + std::to_string(i + 1));
        const auto u = index.find(std::string(f[0]));
        const auto v = index.find(std::string(f[1]));
        if (u == index.end() || v == index.end())
            throw std::runtime_error(edges_path.string() + ": edge names an unknown node");
        Edge e{std::min(u->second, v->second), std::max(u->second, v->second), std::stod(std::string(f[2]))};
        g.edges.push_back(e);
    }
    return g;
}

}  // namespace polarimeter::similarity
