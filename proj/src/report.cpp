#include "polarimeter/report.hpp"

#include <charconv>
#include <sstream>

#include "polarimeter/tsv.hpp"

namespace polarimeter::report {

namespace {

constexpr std::string_view kNotListed = "not listed";

int stance_row(Stance s) {
    switch (s) {
        case Stance::Supp: return 0;
        case Stance::Opp: return 1;
        case Stance::Excluded: return 2;
        default: return -1;
    }
}

int provenance_col(labeling::Provenance p) {
    switch (p) {
        case labeling::Provenance::Seed: return 0;
        case labeling::Provenance::Propagation: return 1;
        case labeling::Provenance::Classifier: return 2;
        default: return -1;
    }
}

std::string display_of(const graph::DisplayNames& display, const ElementKey& key) {
    const auto it = display.find(key);
    return it == display.end() ? key.key : it->second;
}

}  // namespace

DailyCounts daily_counts(std::span<const ingest::Tweet> tweets) {
    std::map<std::string, std::uint64_t> by_day;
    for (const auto& t : tweets) ++by_day[ingest::format_date(t.created_at)];
    DailyCounts out;
    for (auto& [day, n] : by_day) {
        out.rows.emplace_back(day, n);
        out.total += n;
    }
    return out;
}

std::string serialize_daily_counts(const DailyCounts& counts) {
    std::string out = "date\tcount\n";
    for (const auto& [day, n] : counts.rows) out += day + '\t' + std::to_string(n) + '\n';
    out += "total\t" + std::to_string(counts.total) + '\n';
    return out;
}

DailyCounts read_daily_counts(const std::filesystem::path& path) {
    DailyCounts out;
    const auto lines = tsv::read_lines(path);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = tsv::split(lines[i]);
        std::uint64_t n = 0;
        if (f.size() != 2 || std::from_chars(f[1].data(), f[1].data() + f[1].size(), n).ec != std::errc{})
            throw std::runtime_error(path.string() + ": malformed row " + std::to_string(i + 1));
        if (f[0] == "total") continue;
        out.rows.emplace_back(std::string(f[0]), n);
        out.total += n;
    }
    return out;
}

std::uint64_t StageSummary::stance_total(Stance s) const {
    const int r = stance_row(s);
    if (r < 0) return 0;
    return counts[r][0] + counts[r][1] + counts[r][2];
}

std::uint64_t StageSummary::provenance_total(labeling::Provenance p) const {
    const int c = provenance_col(p);
    if (c < 0) return 0;
    return counts[0][c] + counts[1][c] + counts[2][c];
}

std::uint64_t StageSummary::total() const {
    return stance_total(Stance::Supp) + stance_total(Stance::Opp) + stance_total(Stance::Excluded);
}

StageSummary stage_summary(const labeling::LabelMap& labels, const graph::ProfileMap& profiles) {
    StageSummary s;
    for (const auto& [id, label] : labels) {
        const int r = stance_row(label.value);
        const int c = provenance_col(label.provenance);
        if (r < 0 || c < 0) continue;
        ++s.counts[r][c];
        if (const auto it = profiles.find(id); it != profiles.end()) s.tweets[r] += it->second.tweet_count;
    }
    return s;
}

std::string serialize_stage_summary(const StageSummary& s) {
    std::string out = "stance\tseed\tpropagation\tclassifier\ttotal\ttweets\n";
    const Stance stances[] = {Stance::Supp, Stance::Opp, Stance::Excluded};
    for (int r = 0; r < 3; ++r) {
        out += stance_name(stances[r]);
        for (int c = 0; c < 3; ++c) out += '\t' + std::to_string(s.counts[r][c]);
        out += '\t' + std::to_string(s.stance_total(stances[r])) + '\t' + std::to_string(s.tweets[r]) + '\n';
    }
    out += "total\t" + std::to_string(s.provenance_total(labeling::Provenance::Seed)) + '\t' +
           std::to_string(s.provenance_total(labeling::Provenance::Propagation)) + '\t' +
           std::to_string(s.provenance_total(labeling::Provenance::Classifier)) + '\t' + std::to_string(s.total()) +
           '\t' + std::to_string(s.tweets[0] + s.tweets[1] + s.tweets[2]) + '\n';
    return out;
}

std::map<std::string, Annotation> parse_annotations(std::string_view content, std::vector<std::string>& warnings) {
    std::map<std::string, Annotation> out;
    std::istringstream in{std::string(content)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto f = tsv::split(line);
        if (line_no == 1 && f.size() == 3 && f[0] == "key") continue;  // header
        if (f.size() != 3 || f[0].empty()) {
            warnings.push_back("annotations line " + std::to_string(line_no) + ": expected key, bias, credibility");
            continue;
        }
        if (!out.emplace(std::string(f[0]), Annotation{std::string(f[1]), std::string(f[2])}).second)
            warnings.push_back("annotations line " + std::to_string(line_no) + ": duplicate key '" + std::string(f[0]) +
                               "' ignored");
    }
    return out;
}

AnnotatedReport join_annotations(const valence::ValenceTable& table, const std::map<std::string, Annotation>& annotations,
                                 const graph::DisplayNames& display) {
    AnnotatedReport report;
    std::map<std::string, bool> used;
    for (const auto& row : table.rows) {
        AnnotatedRow out{row, display_of(display, row.element), std::string(kNotListed), std::string(kNotListed)};
        if (const auto it = annotations.find(row.element.key); it != annotations.end()) {
            out.bias = it->second.bias;
            out.credibility = it->second.credibility;
            used[it->first] = true;
        }
        report.rows.push_back(std::move(out));
    }
    for (const auto& [key, a] : annotations)
        if (!used.count(key)) report.warnings.push_back("annotation for '" + key + "' matches no scored element");
    return report;
}

std::string serialize_annotated(const AnnotatedReport& report) {
    std::string out = "key\tdisplay\ttf_supp\ttf_opp\tvalence\tbin\tbias\tcredibility\n";
    for (const auto& r : report.rows) {
        out += r.score.element.key + '\t' + r.display + '\t' + std::to_string(r.score.tf_supp) + '\t' +
               std::to_string(r.score.tf_opp) + '\t' + tsv::fixed9(r.score.valence) + '\t' +
               std::string(valence::bin_name(r.score.bin)) + '\t' + r.bias + '\t' + r.credibility + '\n';
    }
    return out;
}

std::string serialize_top_k(const std::array<std::vector<valence::ElementScore>, 5>& top,
                            const graph::DisplayNames& display) {
    std::string out = "bin\trank\tkey\tdisplay\tusage\ttf_supp\ttf_opp\tvalence\n";
    for (auto bin : valence::kAllBins) {
        const auto& rows = top[static_cast<std::size_t>(bin)];
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            out += std::string(valence::bin_name(bin)) + '\t' + std::to_string(i + 1) + '\t' + r.element.key + '\t' +
                   display_of(display, r.element) + '\t' + std::to_string(r.usage()) + '\t' +
                   std::to_string(r.tf_supp) + '\t' + std::to_string(r.tf_opp) + '\t' + tsv::fixed9(r.valence) + '\n';
        }
    }
    return out;
}

}  // namespace polarimeter::report
