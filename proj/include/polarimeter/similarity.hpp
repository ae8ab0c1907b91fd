#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polarimeter/graph.hpp"
#include "polarimeter/labeling.hpp"
#include "polarimeter/types.hpp"

namespace polarimeter::similarity {

/// L1-normalized element frequencies of one user for one element kind.
struct UserVector {
    std::string user_id;
    ElementKind kind = ElementKind::Hashtag;
    std::vector<std::pair<std::string, double>> weights;  // sorted by key, all > 0, sum 1
    double norm = 0.0;                                    // Euclidean norm of weights

    static UserVector from_counts(std::string user_id, ElementKind kind,
                                  const std::vector<std::pair<std::string, std::uint64_t>>& counts);
};

/// Vectors for users with at least min_elements distinct elements of the kind, in user-id order.
std::vector<UserVector> build_vectors(const graph::ProfileMap& profiles, ElementKind kind, std::size_t min_elements = 10);

/// Cosine similarity, summed in key order so cosine(u, v) and cosine(v, u) agree bit for bit.
/// Throws std::invalid_argument when the kinds differ.
double cosine(const UserVector& u, const UserVector& v);

/// Uniform sample without replacement of min(n, eligible) SUPP/OPP-labeled vector owners.
/// Depends only on the eligible set and the seed, not on input order. Result is in user-id order.
std::vector<UserVector> sample_users(std::span<const UserVector> vectors, const labeling::LabelMap& labels,
                                     std::size_t n, std::uint64_t seed);

struct Node {
    std::string user_id;
    Stance stance = Stance::Unlabeled;
};

struct Edge {
    std::uint32_t u = 0;  // node indices, u < v
    std::uint32_t v = 0;
    double weight = 0.0;
};

struct SimilarityGraph {
    std::vector<Node> nodes;
    std::vector<Edge> edges;  // sorted by (u, v)
};

/// Pairs with cosine >= edge_floor become edges. Pair products are accumulated through an
/// inverted index so users without a shared element are never compared; a floor <= 0 asks for
/// the complete graph and materializes every pair.
SimilarityGraph build_similarity_graph(std::span<const UserVector> sampled, const labeling::LabelMap& labels,
                                       double edge_floor = 0.1);

struct GroupCosine {
    double intra_mean = 0.0;
    double inter_mean = 0.0;
    std::size_t intra_pairs = 0;
    std::size_t inter_pairs = 0;
};

/// Mean cosine over all same-stance pairs and over all cross-stance pairs (zeros included).
GroupCosine group_cosine_means(std::span<const UserVector> sampled, const labeling::LabelMap& labels);

/// edges file: u, v, weight (9 places) with user ids; nodes file: user_id, stance.
std::string serialize_edges(const SimilarityGraph& graph);
std::string serialize_nodes(const SimilarityGraph& graph);
SimilarityGraph read_graph(const std::filesystem::path& nodes_path, const std::filesystem::path& edges_path);

}  // namespace polarimeter::similarity
