#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hgd/dataset.hpp"
#include "hgd/embeddings.hpp"
#include "hgd/model.hpp"

namespace hgd {

struct Metrics {
    double accuracy = 0.0;
    double precision_macro = 0.0;
    double recall_macro = 0.0;
    double f1_macro = 0.0;
    std::size_t support = 0;

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Accuracy plus precision/recall/F1 macro-averaged over the labels present
/// in y_true (0 where a denominator vanishes).
Metrics compute_metrics(std::span<const std::string> y_true, std::span<const std::string> y_pred);

/// Labelled feature set of `ids`, vectors taken from `store`, labels from `d`.
LabeledSet labeled_subset(const Dataset& d, const EmbeddingStore& store, std::span<const RecordId> ids);

struct RunOptions {
    /// Worker threads for per-homograph jobs; output does not depend on it.
    std::size_t jobs = 1;
};

// ---------------------------------------------------------------------------

struct ExcludedHomograph {
    std::string homograph;
    std::string reason;
    friend bool operator==(const ExcludedHomograph&, const ExcludedHomograph&) = default;
};

struct ModelComparisonRow {
    std::string model;
    Metrics mean;
    std::size_t homographs = 0;
    /// Per-homograph metrics, homographs in sorted order.
    std::vector<std::pair<std::string, Metrics>> per_homograph;
};

struct ModelComparisonReport {
    std::vector<ModelComparisonRow> rows;  // sorted by model name
    std::vector<ExcludedHomograph> excluded;
    SplitSpec split;
    std::string store_id;
    bool weighted = false;
};

struct ModelComparisonOptions : RunOptions {
    /// Weight each homograph's metrics by its sentence count.
    bool weighted = false;
};

ModelComparisonReport run_model_comparison(const Dataset& d, const EmbeddingStore& store,
                                           std::span<const ModelConfig> models, const SplitSpec& spec,
                                           const ModelComparisonOptions& options = {});

/// `model,accuracy,recall,f1,precision,homographs`.
std::string to_csv(const ModelComparisonReport& r);

// ---------------------------------------------------------------------------

struct EmbeddingComparisonCell {
    std::size_t phoneme_count = 0;
    std::string store;  // "last_layer" or "avg_last4"
    double mean_accuracy = 0.0;
    std::size_t homographs = 0;
    friend bool operator==(const EmbeddingComparisonCell&, const EmbeddingComparisonCell&) = default;
};

struct EmbeddingComparisonReport {
    std::vector<EmbeddingComparisonCell> cells;  // by (phoneme_count, store)
    std::vector<ExcludedHomograph> excluded;
    SplitSpec split;

    const EmbeddingComparisonCell& cell(std::size_t phoneme_count, std::string_view store) const;
};

struct EmbeddingComparisonOptions : RunOptions {
    /// Seed of the evaluation MLP.
    std::uint64_t seed = 0;
};

EmbeddingComparisonReport run_embedding_comparison(const Dataset& d, const EmbeddingStore& store_last,
                                                   const EmbeddingStore& store_avg4, const SplitSpec& spec,
                                                   const EmbeddingComparisonOptions& options = {});

/// `phoneme_count,store,mean_accuracy,homographs`.
std::string to_csv(const EmbeddingComparisonReport& r);

// ---------------------------------------------------------------------------

enum class PairFilter { All, WithinPhoneme, CrossPhoneme };

std::string_view to_string(PairFilter f);
PairFilter parse_pair_filter(std::string_view s);

inline constexpr std::size_t kCosineBins = 20;

/// Bin of `value` among kCosineBins equal bins over [-1, 1]; the last bin is
/// closed.
std::size_t cosine_bin(double value);

struct CosineReport {
    std::vector<std::pair<std::string, double>> per_homograph;  // sorted by homograph
    std::vector<std::size_t> histogram;                         // kCosineBins counts
    std::vector<ExcludedHomograph> excluded;
    PoolingStrategy pooling = PoolingStrategy::LastLayer;
    PairFilter pairs = PairFilter::All;

    static double bin_left(std::size_t i);
    static double bin_right(std::size_t i);
};

CosineReport run_cosine_analysis(const EmbeddingStore& store, PairFilter pairs = PairFilter::All);

/// `homograph,mean_cosine`.
std::string per_homograph_csv(const CosineReport& r);
/// `bin_left,bin_right,count`.
std::string histogram_csv(const CosineReport& r);

}  // namespace hgd
