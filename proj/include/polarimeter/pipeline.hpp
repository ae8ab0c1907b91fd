#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polarimeter/classifier.hpp"
#include "polarimeter/labeling.hpp"
#include "polarimeter/synth.hpp"

namespace polarimeter::pipeline {

struct PipelineConfig {
    int version = 1;
    std::optional<std::filesystem::path> corpus;
    std::optional<synth::SynthConfig> synth;
    std::optional<std::filesystem::path> seeds;
    std::optional<std::filesystem::path> annotations;
    std::uint64_t seed = 42;

    // ingest
    std::vector<std::string> keywords;  // empty means the default list
    bool keyword_filter = true;
    std::optional<std::string> since;  // RFC 3339, inclusive
    std::optional<std::string> until;  // RFC 3339, exclusive

    labeling::PropagationConfig propagation;

    // classifier (seed derived from the top-level seed)
    std::uint32_t dim = 16;
    std::uint32_t epochs = 20;
    double learning_rate = 0.1;
    classifier::ExpansionConfig expansion;

    std::uint64_t min_support = 100;
    std::size_t top_k = 15;

    std::size_t min_elements = 10;
    std::size_t sample = 5000;
    double edge_floor = 0.1;

    std::uint32_t layout_iterations = 200;
    bool layout_weighted = true;
    int svg_width = 1000;
    int svg_height = 1000;

    /// Element kinds the valence, similarity, layout and report stages cover.
    std::vector<ElementKind> kinds{std::begin(kAllKinds), std::end(kAllKinds)};
};

/// Parses a config document. Relative paths resolve against base_dir. Unknown keys, a missing
/// or unsupported version, and bad values throw ConfigError.
PipelineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// Failure inside a named stage; the CLI reports the stage and exits nonzero.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& message);
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct StageOutcome {
    std::string name;
    bool skipped = false;
};

/// Stage names in execution order.
const std::vector<std::string>& stage_names();

/// Runs one stage into out_dir. Unless force is set, a stage whose outputs exist and whose
/// recorded input hash matches is skipped.
StageOutcome run_stage(const std::string& name, const PipelineConfig& config, const std::filesystem::path& out_dir,
                       bool force = false);

/// synth (when configured) -> ingest -> propagate -> train -> classify -> valence ->
/// similarity -> layout -> report.
std::vector<StageOutcome> run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir);

/// Corpus path the ingest stage reads: the configured file, or the synthesized one.
std::filesystem::path corpus_path(const PipelineConfig& config, const std::filesystem::path& out_dir);
std::filesystem::path seeds_path(const PipelineConfig& config, const std::filesystem::path& out_dir);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace polarimeter::pipeline
