#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "polarimeter/similarity.hpp"

namespace polarimeter::layout {

struct LayoutPoint {
    std::string user_id;
    double x = 0.0;
    double y = 0.0;
    Stance stance = Stance::Unlabeled;
};

struct LayoutConfig {
    std::uint32_t iterations = 200;
    std::uint64_t seed = 1;
    bool weighted = true;            // edge weights scale attraction
    double initial_temperature = 0.1;  // max displacement in the first round, unit-square units
};

/// Fruchterman-Reingold in the unit square: k = sqrt(1 / |V|), repulsion k^2 / d between every
/// pair, attraction w * d^2 / k along edges, displacement capped by a temperature falling
/// linearly to zero. Coincident nodes are pushed apart along a seeded direction. The result is
/// uniformly rescaled (aspect preserved) into [0, 1]^2 and a single node sits at (0.5, 0.5).
/// Each node's force is summed independently in index order, so the output does not depend on
/// the thread count.
std::vector<LayoutPoint> fruchterman_reingold(const similarity::SimilarityGraph& graph, const LayoutConfig& config = {});

struct SvgOptions {
    int width = 1000;
    int height = 1000;
    int margin = 10;
};

inline constexpr std::string_view kSuppColor = "#d62728";
inline constexpr std::string_view kOppColor = "#1f77b4";

/// Standalone SVG with one r=2 circle per point, red for SUPP and blue for OPP.
std::string render_svg(const std::vector<LayoutPoint>& points, const SvgOptions& options = {});

/// user_id, x, y (9 places), stance.
std::string serialize_coords(const std::vector<LayoutPoint>& points);

struct GroupDistance {
    double intra_mean = 0.0;
    double inter_mean = 0.0;
};

/// Mean Euclidean distance over same-stance and cross-stance pairs.
GroupDistance group_distance_means(const std::vector<LayoutPoint>& points);

}  // namespace polarimeter::layout
