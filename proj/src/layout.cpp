#include "polarimeter/layout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "polarimeter/parallel.hpp"
#include "polarimeter/random.hpp"
#include "polarimeter/tsv.hpp"

namespace polarimeter::layout {

namespace {

constexpr double kCoincident = 1e-18;  // squared distance below which two nodes count as coincident

/// Direction used to separate coincident nodes lo < hi in a given round; hi moves the other way.
std::pair<double, double> jitter_direction(std::uint64_t seed, std::uint32_t round, std::uint32_t lo, std::uint32_t hi) {
    const std::uint64_t h = splitmix64(seed ^ splitmix64((std::uint64_t(round) << 40) ^ (std::uint64_t(lo) << 20) ^ hi));
    const double angle = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 * std::numbers::pi;
    return {std::cos(angle), std::sin(angle)};
}

}  // namespace

std::vector<LayoutPoint> fruchterman_reingold(const similarity::SimilarityGraph& graph, const LayoutConfig& config) {
    const std::size_t n = graph.nodes.size();
    std::vector<LayoutPoint> points(n);
    for (std::size_t i = 0; i < n; ++i) {
        points[i].user_id = graph.nodes[i].user_id;
        points[i].stance = graph.nodes[i].stance;
    }
    if (n == 0) return points;
    if (n == 1) {
        points[0].x = points[0].y = 0.5;
        return points;
    }

    struct Neighbor {
        std::uint32_t node;
        double weight;
    };
    std::vector<std::vector<Neighbor>> adjacency(n);
    for (const auto& e : graph.edges) {
        if (e.u == e.v) continue;
        const double w = config.weighted ? e.weight : 1.0;
        adjacency[e.u].push_back({e.v, w});
        adjacency[e.v].push_back({e.u, w});
    }

    Rng rng(config.seed);
    std::vector<double> x(n), y(n), nx(n), ny(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = uniform01(rng);
        y[i] = uniform01(rng);
    }

    const double k = std::sqrt(1.0 / static_cast<double>(n));
    const double k2 = k * k;
    const std::uint32_t rounds = config.iterations;
    for (std::uint32_t round = 0; round < rounds; ++round) {
        const double temperature =
            config.initial_temperature * (1.0 - static_cast<double>(round) / static_cast<double>(rounds));
        parallel_for(n, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const double xi = x[i], yi = y[i];
                double dx = 0.0, dy = 0.0;
                std::size_t coincident = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double ex = xi - x[j];
                    const double ey = yi - y[j];
                    const double d2 = ex * ex + ey * ey;
                    const bool far = d2 > kCoincident;
                    const double s = far ? k2 / d2 : 0.0;
                    dx += ex * s;
                    dy += ey * s;
                    coincident += far ? 0 : 1;
                }
                if (coincident > 1) {
                    for (std::size_t j = 0; j < n; ++j) {
                        if (j == i) continue;
                        const double ex = xi - x[j], ey = yi - y[j];
                        if (ex * ex + ey * ey > kCoincident) continue;
                        const auto lo = static_cast<std::uint32_t>(std::min(i, j));
                        const auto hi = static_cast<std::uint32_t>(std::max(i, j));
                        auto [ux, uy] = jitter_direction(config.seed, round, lo, hi);
                        const double sign = i == lo ? 1.0 : -1.0;
                        // Treat the pair as one k apart along the jitter direction.
                        dx += sign * ux * k;
                        dy += sign * uy * k;
                    }
                }
                for (const auto& nb : adjacency[i]) {
                    const double ex = xi - x[nb.node];
                    const double ey = yi - y[nb.node];
                    const double d = std::sqrt(ex * ex + ey * ey);
                    const double s = nb.weight * d / k;  // |f| = w d^2 / k, along the unit vector
                    dx -= ex * s;
                    dy -= ey * s;
                }
                const double len = std::sqrt(dx * dx + dy * dy);
                if (len > 0.0 && std::isfinite(len)) {
                    const double step = std::min(len, temperature) / len;
                    nx[i] = xi + dx * step;
                    ny[i] = yi + dy * step;
                } else {
                    nx[i] = xi;
                    ny[i] = yi;
                }
            }
        });
        std::swap(x, nx);
        std::swap(y, ny);
    }

    const auto [min_x, max_x] = std::minmax_element(x.begin(), x.end());
    const auto [min_y, max_y] = std::minmax_element(y.begin(), y.end());
    const double span_x = *max_x - *min_x;
    const double span_y = *max_y - *min_y;
    const double span = std::max(span_x, span_y);
    for (std::size_t i = 0; i < n; ++i) {
        if (span > 0.0) {
            points[i].x = std::clamp((x[i] - *min_x) / span + (1.0 - span_x / span) / 2.0, 0.0, 1.0);
            points[i].y = std::clamp((y[i] - *min_y) / span + (1.0 - span_y / span) / 2.0, 0.0, 1.0);
        } else {
            points[i].x = points[i].y = 0.5;
        }
    }
    return points;
}

std::string render_svg(const std::vector<LayoutPoint>& points, const SvgOptions& o) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
    out += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n",
                       o.width, o.height);
    out += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    const double w = o.width - 2.0 * o.margin;
    const double h = o.height - 2.0 * o.margin;
    for (const auto& p : points) {
        const std::string_view fill =
            p.stance == Stance::Supp ? kSuppColor : (p.stance == Stance::Opp ? kOppColor : std::string_view("#7f7f7f"));
        out += fmt::format("<circle cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"2\" fill=\"{}\"/>\n", o.margin + p.x * w,
                           o.margin + (1.0 - p.y) * h, fill);
    }
    out += "</svg>\n";
    return out;
}

std::string serialize_coords(const std::vector<LayoutPoint>& points) {
    std::string out = "user_id\tx\ty\tstance\n";
    for (const auto& p : points) {
        out += p.user_id + '\t' + tsv::fixed9(p.x) + '\t' + tsv::fixed9(p.y) + '\t';
        out += stance_name(p.stance);
        out += '\n';
    }
    return out;
}

GroupDistance group_distance_means(const std::vector<LayoutPoint>& points) {
    double intra = 0.0, inter = 0.0;
    std::size_t n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            const double d = std::hypot(points[i].x - points[j].x, points[i].y - points[j].y);
            if (points[i].stance == points[j].stance) {
                intra += d;
                ++n_intra;
            } else {
                inter += d;
                ++n_inter;
            }
        }
    }
    GroupDistance g;
    if (n_intra) g.intra_mean = intra / static_cast<double>(n_intra);
    if (n_inter) g.inter_mean = inter / static_cast<double>(n_inter);
    return g;
}

}  // namespace polarimeter::layout
