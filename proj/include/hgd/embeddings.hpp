#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hgd/dataset.hpp"
#include "hgd/random.hpp"

namespace hgd {

enum class PoolingStrategy { LastLayer, AvgLastFour };

/// "last_layer" / "avg_last4".
std::string_view to_string(PoolingStrategy p);
/// Throws FormatError on an unknown tag.
PoolingStrategy parse_pooling(std::string_view tag);

using Vector = std::vector<double>;

struct EmbeddingRecord {
    RecordId record_id = 0;
    std::string homograph;
    std::string phoneme;
    Vector vector;

    friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

/// Vectors for dataset records under one pooling strategy. Construction
/// checks that every vector has length `dim`, is finite, and that ids are
/// unique.
class EmbeddingStore {
public:
    EmbeddingStore(std::size_t dim, PoolingStrategy pooling, std::string model_id,
                   std::vector<EmbeddingRecord> records = {});

    std::size_t dim() const noexcept { return dim_; }
    PoolingStrategy pooling() const noexcept { return pooling_; }
    const std::string& model_id() const noexcept { return model_id_; }
    const std::vector<EmbeddingRecord>& records() const noexcept { return records_; }
    const HomographIndex& index() const noexcept { return index_; }
    std::size_t size() const noexcept { return records_.size(); }

    /// nullptr when no record carries `id`.
    const EmbeddingRecord* find(RecordId id) const;

    friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
        return a.dim_ == b.dim_ && a.pooling_ == b.pooling_ && a.model_id_ == b.model_id_ &&
               a.records_ == b.records_;
    }

private:
    std::size_t dim_;
    PoolingStrategy pooling_;
    std::string model_id_;
    std::vector<EmbeddingRecord> records_;
    HomographIndex index_;
    std::unordered_map<RecordId, std::size_t> position_;
};

inline constexpr std::string_view kStoreFormat = "hgd-emb/1";

/// Line-delimited JSON: header object, then one object per record.
void write_store(const EmbeddingStore& s, std::ostream& sink);
std::string store_to_string(const EmbeddingStore& s);

EmbeddingStore read_store(std::istream& source);
EmbeddingStore read_store_string(std::string_view text);

// ---------------------------------------------------------------------------
// Cosine similarity

double cosine(std::span<const double> u, std::span<const double> v);

/// Mean cosine over all unordered pairs i < j. Degenerate vectors are
/// reported by their position in `vectors`.
double mean_pairwise_cosine(std::span<const Vector> vectors);

// ---------------------------------------------------------------------------
// Synthetic stores

struct SynthInventory {
    std::string homograph;
    /// phoneme -> record count; records are emitted in label order.
    std::map<std::string, std::size_t> counts;
};

struct SynthSpec {
    std::size_t dim = 16;
    double noise_sigma = 0.1;
    double class_separation = 10.0;
    std::vector<SynthInventory> inventories;
    std::uint64_t seed = 0;
    PoolingStrategy pooling = PoolingStrategy::LastLayer;
    std::string model_id = "synthetic";
};

/// Parses the JSON spec document used by `synth --spec`.
SynthSpec parse_synth_spec(std::string_view json_text);

/// Inventories shaped like the reference corpus: 71 homographs with two
/// phonemes, 10 with three and one with four, `per_phoneme` records each.
std::vector<SynthInventory> reference_shaped_inventories(std::size_t per_phoneme);

/// Class means for one homograph: `n_classes` points in `dim` dimensions with
/// every pairwise distance >= separation.
std::vector<Vector> synthetic_class_means(std::size_t dim, std::size_t n_classes, double separation, Rng& rng);

EmbeddingStore generate_synthetic_store(const SynthSpec& spec);

/// A dataset aligned record-for-record with generate_synthetic_store(spec).
/// Sentences are placeholders that contain the homograph.
Dataset synthetic_dataset(const SynthSpec& spec);

}  // namespace hgd
