#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace hgd {

using RecordId = std::size_t;
using HomographIndex = std::map<std::string, std::vector<RecordId>, std::less<>>;

/// One annotated sentence: surface form, pronunciation label and context.
struct HomographRecord {
    RecordId record_id = 0;
    std::string homograph;
    std::string phoneme;
    std::string sentence;

    friend bool operator==(const HomographRecord&, const HomographRecord&) = default;
};

/// Records in file order plus a homograph -> record ids index. Immutable once
/// built; record ids equal positions in `records()`.
class Dataset {
public:
    Dataset() = default;

    /// Takes (homograph, phoneme, sentence) triples in order; ids are
    /// reassigned densely from 0.
    explicit Dataset(std::vector<HomographRecord> records);

    const std::vector<HomographRecord>& records() const noexcept { return records_; }
    const HomographIndex& index() const noexcept { return index_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    const HomographRecord& at(RecordId id) const { return records_.at(id); }

    /// Record ids of `homograph` in file order; throws LookupError if absent.
    const std::vector<RecordId>& ids_for(std::string_view homograph) const;

    /// Sorted distinct phoneme labels of `homograph`.
    std::vector<std::string> phonemes_for(std::string_view homograph) const;

    friend bool operator==(const Dataset& a, const Dataset& b) { return a.records_ == b.records_; }

private:
    std::vector<HomographRecord> records_;
    HomographIndex index_;
};

struct ParseOptions {
    bool normalize_arabic_yeh_kaf = false;
};

/// Reads the tab-separated `homograph, phoneme, sentence` format. An optional
/// first line starting with "homograph" is treated as a header; blank lines
/// are skipped. Fields are trimmed of surrounding ASCII whitespace.
Dataset parse_dataset(std::istream& source, const ParseOptions& options = {});
Dataset parse_dataset_string(std::string_view text, const ParseOptions& options = {});

/// Writes the header line and one line per record. parse_dataset on the
/// output reproduces `d`.
void write_dataset(const Dataset& d, std::ostream& sink);
std::string dataset_to_tsv(const Dataset& d);

// ---------------------------------------------------------------------------
// Validation

enum class IssueKind { HomographAbsent, Duplicate, SinglePhoneme };

std::string_view to_string(IssueKind kind);

struct ValidationIssue {
    RecordId record_id = 0;
    IssueKind kind = IssueKind::HomographAbsent;
    /// For duplicates: every id of the duplicate group (including record_id).
    std::vector<RecordId> related;

    friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    std::size_t count(IssueKind kind) const;
};

ValidationReport validate(const Dataset& d);

/// `record_id,kind,homograph,related_ids` with related ids joined by ';'.
std::string validation_to_csv(const Dataset& d, const ValidationReport& report);

// ---------------------------------------------------------------------------
// Statistics

struct PhonemeInventory {
    std::string homograph;
    /// Distinct labels, sorted.
    std::vector<std::string> phonemes;
    std::map<std::string, std::size_t> counts;

    std::size_t total() const;
};

struct DatasetStats {
    std::map<std::size_t, std::size_t> sentence_length_hist;
    std::map<std::size_t, std::size_t> homograph_position_hist;
    std::size_t position_unresolved = 0;
    std::map<std::size_t, std::size_t> phoneme_count_dist;
    std::map<std::size_t, std::size_t> homograph_length_hist;
    /// One per homograph, in index (byte-lexicographic) order.
    std::vector<PhonemeInventory> inventories;
};

PhonemeInventory inventory_of(const Dataset& d, std::string_view homograph);

DatasetStats compute_stats(const Dataset& d);

/// `key,count` rows, keys ascending.
std::string histogram_to_csv(const std::map<std::size_t, std::size_t>& hist);

/// `homograph,phoneme,count`.
std::string inventories_to_csv(const DatasetStats& stats);

// ---------------------------------------------------------------------------
// Splitting

struct SplitSpec {
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    bool stratified = true;
};

inline constexpr double kModelComparisonTestFraction = 0.2;
inline constexpr double kEmbeddingComparisonTestFraction = 0.3;

struct SplitResult {
    std::vector<RecordId> train;
    std::vector<RecordId> test;

    friend bool operator==(const SplitResult&, const SplitResult&) = default;
};

/// Per-phoneme test quota for a stratified split.
std::size_t stratified_test_count(std::size_t count, double test_fraction);

/// Train/test partition of one homograph's records; both lists ascending.
SplitResult split(const Dataset& d, std::string_view homograph, const SplitSpec& spec);

}  // namespace hgd
