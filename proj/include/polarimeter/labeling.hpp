#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "polarimeter/graph.hpp"
#include "polarimeter/types.hpp"

namespace polarimeter::labeling {

enum class Provenance : std::uint8_t { None, Seed, Propagation, Classifier };

std::string_view provenance_name(Provenance p);

struct StanceLabel {
    Stance value = Stance::Unlabeled;
    Provenance provenance = Provenance::None;
    int iteration = 0;  // propagation round (>= 1) for Propagation labels, 0 otherwise

    static StanceLabel seed(Stance s) { return {s, Provenance::Seed, 0}; }
    static StanceLabel propagated(Stance s, int iteration) { return {s, Provenance::Propagation, iteration}; }
    static StanceLabel classified(Stance s) { return {s, Provenance::Classifier, 0}; }

    bool operator==(const StanceLabel&) const = default;
};

/// Labeled users only; a user absent from the map is UNLABELED.
using LabelMap = std::map<std::string, StanceLabel>;

Stance stance_of(const LabelMap& labels, const std::string& user_id);

struct PropagationConfig {
    std::uint32_t supp_threshold = 15;
    std::uint32_t opp_threshold = 7;
    std::uint32_t max_iterations = 20;

    void validate() const;
};

/// Parses a seed file: one "<handle-or-id> <SUPP|OPP|EXCLUDED>" row per line, tab or space
/// separated; blank lines and '#' comments are skipped. When profiles are given, a token that
/// is not a user id but matches a handle (casefolded, '@' optional) resolves to that user.
/// Throws ConfigError on an unknown stance token or conflicting duplicate rows.
LabelMap load_seeds(const std::filesystem::path& path, const graph::ProfileMap* profiles = nullptr);
LabelMap parse_seeds(std::string_view content, const graph::ProfileMap* profiles = nullptr);

struct IterationTrace {
    int iteration = 0;
    std::size_t added_supp = 0;
    std::size_t added_opp = 0;

    std::size_t added() const { return added_supp + added_opp; }
};

struct PropagationResult {
    LabelMap labels;
    std::vector<IterationTrace> trace;  // ends with a zero-addition round when converged
    bool converged = false;
};

/// Retweet-overlap propagation with synchronous rounds. In each round an unlabeled user u with
/// S(u) supporting-overlap tweets and O(u) opposing-overlap tweets becomes SUPP when
/// S >= supp_threshold and O == 0, or OPP when O >= opp_threshold and S == 0. Overlap is
/// counted over u's distinct retweeted originals whose audience holds a user labeled on that
/// side at the end of the previous round. Existing labels (any provenance) are never changed.
PropagationResult propagate(const graph::ProfileMap& profiles, const graph::AudienceMap& audiences,
                            const LabelMap& initial, const PropagationConfig& config = {});

std::string serialize_labels(const LabelMap& labels);
void write_labels(const LabelMap& labels, const std::filesystem::path& path);
LabelMap read_labels(const std::filesystem::path& path);

void write_trace(const std::vector<IterationTrace>& trace, const std::filesystem::path& path);

}  // namespace polarimeter::labeling
