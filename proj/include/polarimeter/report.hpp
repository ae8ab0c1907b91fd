#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "polarimeter/graph.hpp"
#include "polarimeter/ingest.hpp"
#include "polarimeter/labeling.hpp"
#include "polarimeter/valence.hpp"

namespace polarimeter::report {

struct DailyCounts {
    std::vector<std::pair<std::string, std::uint64_t>> rows;  // UTC date ascending
    std::uint64_t total = 0;
};

DailyCounts daily_counts(std::span<const ingest::Tweet> tweets);
std::string serialize_daily_counts(const DailyCounts& counts);
DailyCounts read_daily_counts(const std::filesystem::path& path);

/// Label counts by stance (SUPP, OPP, EXCLUDED) and provenance (seed, propagation, classifier),
/// with per-stance tweet totals taken from the profiles.
struct StageSummary {
    // [stance][provenance]: stance 0 SUPP, 1 OPP, 2 EXCLUDED; provenance 0 seed, 1 propagation, 2 classifier
    std::array<std::array<std::uint64_t, 3>, 3> counts{};
    std::array<std::uint64_t, 3> tweets{};

    std::uint64_t stance_total(Stance s) const;
    std::uint64_t provenance_total(labeling::Provenance p) const;
    std::uint64_t total() const;
};

StageSummary stage_summary(const labeling::LabelMap& labels, const graph::ProfileMap& profiles);
std::string serialize_stage_summary(const StageSummary& summary);

struct Annotation {
    std::string bias;
    std::string credibility;
};

struct AnnotatedRow {
    valence::ElementScore score;
    std::string display;
    std::string bias;
    std::string credibility;
};

struct AnnotatedReport {
    std::vector<AnnotatedRow> rows;
    std::vector<std::string> warnings;
};

/// Parses "key<TAB>bias<TAB>credibility" rows (header and '#' lines skipped); malformed rows
/// become warnings.
std::map<std::string, Annotation> parse_annotations(std::string_view content, std::vector<std::string>& warnings);

/// Left join of the table onto the annotations. Missing keys read "not listed"; annotation keys
/// absent from the table are reported as warnings.
AnnotatedReport join_annotations(const valence::ValenceTable& table, const std::map<std::string, Annotation>& annotations,
                                 const graph::DisplayNames& display = {});
std::string serialize_annotated(const AnnotatedReport& report);

/// bin, rank, key, display, usage, tf_supp, tf_opp, valence.
std::string serialize_top_k(const std::array<std::vector<valence::ElementScore>, 5>& top,
                            const graph::DisplayNames& display);

}  // namespace polarimeter::report
