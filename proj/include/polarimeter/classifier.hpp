#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polarimeter/graph.hpp"
#include "polarimeter/labeling.hpp"

namespace polarimeter::classifier {

/// Retweeted account (canonical handle) -> retweet count.
using FeatureBag = std::map<std::string, std::uint64_t>;

FeatureBag feature_bag(const graph::UserProfile& profile);

struct Hyperparams {
    std::uint32_t dim = 16;
    std::uint32_t epochs = 20;
    double learning_rate = 0.1;  // decays linearly to zero over the run
    std::uint64_t seed = 1;

    void validate() const;
};

struct Example {
    FeatureBag bag;
    Stance label = Stance::Supp;  // SUPP or OPP
};

/// Averaged feature embeddings followed by a two-way linear softmax. Class 0 is SUPP, 1 is OPP.
struct Model {
    Hyperparams hyperparams;
    std::map<std::string, std::uint32_t> vocab;
    std::vector<double> embeddings;      // vocab.size() x dim, row-major
    std::vector<double> output_weights;  // dim x 2, row-major

    std::uint32_t dim() const { return hyperparams.dim; }

    /// Count-weighted mean of in-vocabulary embeddings; nullopt when every feature is OOV.
    std::optional<std::vector<double>> hidden(const FeatureBag& bag) const;
    std::optional<std::array<double, 2>> probabilities(const FeatureBag& bag) const;

    bool operator==(const Model&) const = default;
};

struct Prediction {
    Stance stance = Stance::Supp;
    double confidence = 0.5;
    std::array<double, 2> probabilities{};
};

/// Throws std::invalid_argument for an empty bag. Returns nullopt ("unclassifiable") when no
/// feature is in the vocabulary. Equal probabilities resolve to SUPP.
std::optional<Prediction> predict(const Model& model, const FeatureBag& bag);

/// Deterministic SGD on cross-entropy. Throws std::invalid_argument when only one class is
/// present, when a bag is empty, or when a label is not SUPP/OPP.
Model train(std::span<const Example> examples, const Hyperparams& hyperparams);

/// Cross-entropy of one example plus its analytic gradient, laid out like the model.
struct LossGradient {
    double loss = 0.0;
    std::vector<double> d_embeddings;
    std::vector<double> d_output_weights;
};

double example_loss(const Model& model, const FeatureBag& bag, Stance label);
LossGradient loss_and_gradient(const Model& model, const FeatureBag& bag, Stance label);

/// SUPP/OPP-labeled users with a nonempty bag, in user-id order.
std::vector<Example> training_examples(const graph::ProfileMap& profiles, const labeling::LabelMap& labels);

struct ExpansionConfig {
    std::size_t min_distinct_accounts = 20;
    double confidence_threshold = 0.9;  // strict: confidence must exceed it
};

/// Labels unlabeled users that retweeted at least min_distinct_accounts distinct accounts when
/// the classifier is more than confidence_threshold sure. Existing labels, EXCLUDED included,
/// are left untouched.
labeling::LabelMap expand_labels(const Model& model, const graph::ProfileMap& profiles,
                                 const labeling::LabelMap& labels, const ExpansionConfig& config = {});

/// Binary layout, little-endian throughout:
///   "PLMD" | u32 version | u32 dim | u64 vocab size
///   vocab entries in index order: u32 byte length, bytes
///   embeddings (vocab x dim f64), output weights (dim x 2 f64)
std::string serialize_model(const Model& model);
Model deserialize_model(std::string_view bytes);
void write_model(const Model& model, const std::filesystem::path& path);
Model read_model(const std::filesystem::path& path);

}  // namespace polarimeter::classifier
