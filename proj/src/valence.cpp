#include "polarimeter/valence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>

#include "polarimeter/tsv.hpp"

namespace polarimeter::valence {

std::string_view bin_name(ValenceBin bin) {
    switch (bin) {
        case ValenceBin::StrongOpp: return "strong_opp";
        case ValenceBin::Opp: return "opp";
        case ValenceBin::Neutral: return "neutral";
        case ValenceBin::Supp: return "supp";
        case ValenceBin::StrongSupp: return "strong_supp";
    }
    return "neutral";
}

namespace {

std::optional<ValenceBin> parse_bin(std::string_view s) {
    for (auto b : kAllBins)
        if (bin_name(b) == s) return b;
    return std::nullopt;
}

}  // namespace

double compute_valence(std::uint64_t tf_supp, std::uint64_t total_supp, std::uint64_t tf_opp, std::uint64_t total_opp) {
    if (total_supp == 0 || total_opp == 0) throw ConfigError("valence needs nonzero SUPP and OPP totals");
    if (tf_supp + tf_opp == 0) throw std::invalid_argument("valence of an element that never occurs");
    const double rs = static_cast<double>(tf_supp) / static_cast<double>(total_supp);
    const double ro = static_cast<double>(tf_opp) / static_cast<double>(total_opp);
    return (rs - ro) / (rs + ro);
}

ValenceBin bin_of(double v) {
    if (!(v >= -1.0 && v <= 1.0)) throw std::domain_error("valence outside [-1, 1]");
    if (v < -0.6) return ValenceBin::StrongOpp;
    if (v < -0.2) return ValenceBin::Opp;
    if (v < 0.2) return ValenceBin::Neutral;
    if (v < 0.6) return ValenceBin::Supp;
    return ValenceBin::StrongSupp;
}

ValenceTable build_valence_table(const graph::ProfileMap& profiles, const labeling::LabelMap& labels,
                                 ElementKind kind, std::uint64_t min_tweet_support) {
    struct Tf {
        std::uint64_t supp = 0, opp = 0;
    };
    std::map<std::string, Tf> counts;
    bool any_supp = false, any_opp = false;
    ValenceTable table;
    table.kind = kind;
    table.min_support = min_tweet_support;

    for (const auto& [id, label] : labels) {
        if (label.value != Stance::Supp && label.value != Stance::Opp) continue;
        const bool supp = label.value == Stance::Supp;
        (supp ? any_supp : any_opp) = true;
        const auto it = profiles.find(id);
        if (it == profiles.end()) continue;
        for (const auto& [key, n] : it->second.element_counts) {
            if (key.kind != kind) continue;
            auto& tf = counts[key.key];
            (supp ? tf.supp : tf.opp) += n;
            (supp ? table.total_supp : table.total_opp) += n;
        }
    }
    if (!any_supp || !any_opp) throw ConfigError("valence needs labeled users on both sides");
    if (table.total_supp == 0 || table.total_opp == 0)
        throw ConfigError(std::string("no ") + std::string(kind_name(kind)) + " occurrences for one of the groups");

    for (const auto& [key, tf] : counts) {
        if (tf.supp + tf.opp < min_tweet_support || tf.supp + tf.opp == 0) continue;
        ElementScore row;
        row.element = {kind, key};
        row.tf_supp = tf.supp;
        row.tf_opp = tf.opp;
        row.valence = compute_valence(tf.supp, table.total_supp, tf.opp, table.total_opp);
        row.bin = bin_of(row.valence);
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::array<BinStats, 5> bin_histogram(const ValenceTable& table) {
    std::array<BinStats, 5> h{};
    for (const auto& row : table.rows) {
        auto& b = h[static_cast<std::size_t>(row.bin)];
        ++b.element_count;
        b.usage += row.usage();
    }
    return h;
}

std::array<std::vector<ElementScore>, 5> top_k_per_bin(const ValenceTable& table, std::size_t k) {
    std::array<std::vector<ElementScore>, 5> out;
    for (const auto& row : table.rows) out[static_cast<std::size_t>(row.bin)].push_back(row);
    for (auto& bin : out) {
        std::sort(bin.begin(), bin.end(), [](const ElementScore& a, const ElementScore& b) {
            if (a.usage() != b.usage()) return a.usage() > b.usage();
            return a.element.key < b.element.key;
        });
        if (bin.size() > k) bin.resize(k);
    }
    return out;
}

std::string serialize_table(const ValenceTable& table) {
    std::string out = "key\ttf_supp\ttf_opp\tvalence\tbin\n";
    for (const auto& r : table.rows) {
        out += r.element.key;
        out += '\t' + std::to_string(r.tf_supp) + '\t' + std::to_string(r.tf_opp) + '\t' + tsv::fixed9(r.valence) + '\t';
        out += bin_name(r.bin);
        out += '\n';
    }
    return out;
}

std::string serialize_histogram(const std::array<BinStats, 5>& histogram) {
    std::string out = "bin\telement_count\tusage\n";
    for (auto b : kAllBins) {
        const auto& s = histogram[static_cast<std::size_t>(b)];
        out += bin_name(b);
        out += '\t' + std::to_string(s.element_count) + '\t' + std::to_string(s.usage) + '\n';
    }
    return out;
}

ValenceTable read_table(const std::filesystem::path& path, ElementKind kind) {
    const auto lines = tsv::read_lines(path);
    ValenceTable table;
    table.kind = kind;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = tsv::split(lines[i]);
        if (f.size() != 5) throw std::runtime_error(path.string() + ": malformed row " + std::to_string(i + 1));
        ElementScore r;
        r.element = {kind, std::string(f[0])};
        auto num = [&](std::string_view s, auto& v) {
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size())
                throw std::runtime_error(path.string() + ": bad number in row " + std::to_string(i + 1));
        };
        num(f[1], r.tf_supp);
        num(f[2], r.tf_opp);
        r.valence = std::stod(std::string(f[3]));
        const auto bin = parse_bin(f[4]);
        if (!bin) throw std::runtime_error(path.string() + ": bad bin in row " + std::to_string(i + 1));
        r.bin = *bin;
        table.rows.push_back(std::move(r));
    }
    return table;
}

}  // namespace polarimeter::valence
