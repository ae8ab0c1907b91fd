#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "polarimeter/graph.hpp"
#include "polarimeter/labeling.hpp"
#include "polarimeter/types.hpp"

namespace polarimeter::valence {

enum class ValenceBin : std::uint8_t { StrongOpp = 0, Opp = 1, Neutral = 2, Supp = 3, StrongSupp = 4 };

inline constexpr std::array<ValenceBin, 5> kAllBins = {ValenceBin::StrongOpp, ValenceBin::Opp, ValenceBin::Neutral,
                                                       ValenceBin::Supp, ValenceBin::StrongSupp};

std::string_view bin_name(ValenceBin bin);

/// Valence of an element from its per-group frequencies and the per-group totals:
///   V = 2 * r_s / (r_s + r_o) - 1,   r_s = tf_supp / total_supp,  r_o = tf_opp / total_opp
/// evaluated as (r_s - r_o) / (r_s + r_o), which is the same quantity but is exactly
/// antisymmetric under swapping the groups and exactly +-1 for one-sided elements.
/// Throws ConfigError for a zero total and std::invalid_argument when tf_supp + tf_opp == 0.
double compute_valence(std::uint64_t tf_supp, std::uint64_t total_supp, std::uint64_t tf_opp, std::uint64_t total_opp);

/// Five equal bins over [-1, 1], half-open on the right except the top one, which is closed.
/// Throws std::domain_error outside [-1, 1] (NaN included).
ValenceBin bin_of(double v);

struct ElementScore {
    ElementKey element;
    std::uint64_t tf_supp = 0;
    std::uint64_t tf_opp = 0;
    double valence = 0.0;
    ValenceBin bin = ValenceBin::Neutral;

    std::uint64_t usage() const { return tf_supp + tf_opp; }
};

struct ValenceTable {
    ElementKind kind = ElementKind::Hashtag;
    std::uint64_t total_supp = 0;  // over every element of the kind, before the support filter
    std::uint64_t total_opp = 0;
    std::uint64_t min_support = 0;
    std::vector<ElementScore> rows;  // sorted by key
};

/// Counts each element over tweets authored by SUPP- and OPP-labeled users and scores every
/// element whose combined support reaches min_tweet_support. Throws ConfigError when either
/// group has no labeled user or no element of the kind.
ValenceTable build_valence_table(const graph::ProfileMap& profiles, const labeling::LabelMap& labels,
                                 ElementKind kind, std::uint64_t min_tweet_support = 100);

struct BinStats {
    std::uint64_t element_count = 0;
    std::uint64_t usage = 0;
};

std::array<BinStats, 5> bin_histogram(const ValenceTable& table);

/// Per bin, elements by usage descending, ties by key ascending, truncated to k.
std::array<std::vector<ElementScore>, 5> top_k_per_bin(const ValenceTable& table, std::size_t k = 15);

/// key, tf_supp, tf_opp, valence (9 places), bin.
std::string serialize_table(const ValenceTable& table);
std::string serialize_histogram(const std::array<BinStats, 5>& histogram);
ValenceTable read_table(const std::filesystem::path& path, ElementKind kind);

}  // namespace polarimeter::valence
