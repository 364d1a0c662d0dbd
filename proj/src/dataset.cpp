#include "hgd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

#include "hgd/error.hpp"
#include "hgd/random.hpp"
#include "hgd/text.hpp"

namespace hgd {

Dataset::Dataset(std::vector<HomographRecord> records) : records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        records_[i].record_id = i;
        index_[records_[i].homograph].push_back(i);
    }
}

const std::vector<RecordId>& Dataset::ids_for(std::string_view homograph) const {
    const auto it = index_.find(homograph);
    if (it == index_.end()) throw LookupError("unknown homograph: " + std::string(homograph));
    return it->second;
}

std::vector<std::string> Dataset::phonemes_for(std::string_view homograph) const {
    std::set<std::string> labels;
    for (RecordId id : ids_for(homograph)) labels.insert(records_[id].phoneme);
    return {labels.begin(), labels.end()};
}

// ---------------------------------------------------------------------------

Dataset parse_dataset_string(std::string_view text, const ParseOptions& options) {
    static constexpr const char* kColumns[] = {"homograph", "phoneme", "sentence"};
    std::vector<HomographRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!text::is_valid_utf8(line)) throw EncodingError(line_no, "invalid UTF-8");
        if (text::trim(line).empty()) continue;
        if (line_no == 1 && line.starts_with("homograph")) continue;

        const auto cols = text::split(line, '\t');
        if (cols.size() != 3) {
            throw ParseError(line_no, "",
                             "expected 3 tab-separated columns, found " + std::to_string(cols.size()));
        }
        std::string fields[3];
        for (int c = 0; c < 3; ++c) {
            const auto trimmed = text::trim(cols[c]);
            if (trimmed.empty()) throw ParseError(line_no, kColumns[c], std::string("empty ") + kColumns[c]);
            fields[c] = options.normalize_arabic_yeh_kaf ? text::normalize_arabic_yeh_kaf(trimmed)
                                                         : std::string(trimmed);
        }
        records.push_back({0, std::move(fields[0]), std::move(fields[1]), std::move(fields[2])});
    }
    return Dataset(std::move(records));
}

Dataset parse_dataset(std::istream& source, const ParseOptions& options) {
    std::string text{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
    return parse_dataset_string(text, options);
}

void write_dataset(const Dataset& d, std::ostream& sink) {
    sink << "homograph\tphoneme\tsentence\n";
    for (const auto& r : d.records()) sink << r.homograph << '\t' << r.phoneme << '\t' << r.sentence << '\n';
}

std::string dataset_to_tsv(const Dataset& d) {
    std::ostringstream os;
    write_dataset(d, os);
    return std::move(os).str();
}

// ---------------------------------------------------------------------------

std::string_view to_string(IssueKind kind) {
    switch (kind) {
        case IssueKind::HomographAbsent: return "homograph-absent";
        case IssueKind::Duplicate: return "duplicate";
        case IssueKind::SinglePhoneme: return "single-phoneme";
    }
    return "unknown";
}

std::size_t ValidationReport::count(IssueKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(issues.begin(), issues.end(), [kind](const auto& i) { return i.kind == kind; }));
}

ValidationReport validate(const Dataset& d) {
    ValidationReport report;
    for (const auto& r : d.records()) {
        if (r.sentence.find(r.homograph) == std::string::npos)
            report.issues.push_back({r.record_id, IssueKind::HomographAbsent, {}});
    }

    std::map<std::tuple<std::string_view, std::string_view, std::string_view>, std::vector<RecordId>> groups;
    for (const auto& r : d.records()) groups[{r.homograph, r.phoneme, r.sentence}].push_back(r.record_id);
    for (auto& [key, ids] : groups) {
        if (ids.size() > 1) report.issues.push_back({ids.front(), IssueKind::Duplicate, ids});
    }

    for (const auto& [homograph, ids] : d.index()) {
        if (d.phonemes_for(homograph).size() == 1)
            report.issues.push_back({ids.front(), IssueKind::SinglePhoneme, {}});
    }

    std::stable_sort(report.issues.begin(), report.issues.end(), [](const auto& a, const auto& b) {
        return std::tie(a.record_id, a.kind) < std::tie(b.record_id, b.kind);
    });
    return report;
}

std::string validation_to_csv(const Dataset& d, const ValidationReport& report) {
    std::string out = "record_id,kind,homograph,related_ids\n";
    for (const auto& issue : report.issues) {
        out += std::to_string(issue.record_id);
        out += ',';
        out += to_string(issue.kind);
        out += ',';
        out += text::csv_field(d.at(issue.record_id).homograph);
        out += ',';
        for (std::size_t i = 0; i < issue.related.size(); ++i) {
            if (i) out += ';';
            out += std::to_string(issue.related[i]);
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------

std::size_t PhonemeInventory::total() const {
    std::size_t t = 0;
    for (const auto& [_, c] : counts) t += c;
    return t;
}

PhonemeInventory inventory_of(const Dataset& d, std::string_view homograph) {
    PhonemeInventory inv;
    inv.homograph = std::string(homograph);
    for (RecordId id : d.ids_for(homograph)) ++inv.counts[d.at(id).phoneme];
    for (const auto& [label, _] : inv.counts) inv.phonemes.push_back(label);
    return inv;
}

namespace {

std::optional<std::size_t> homograph_position(std::string_view sentence, std::string_view homograph) {
    const auto tokens = text::whitespace_tokens(sentence);
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (tokens[i] == homograph) return i;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (tokens[i].find(homograph) != std::string_view::npos) return i;
    return std::nullopt;
}

}  // namespace

DatasetStats compute_stats(const Dataset& d) {
    DatasetStats s;
    for (const auto& r : d.records()) {
        ++s.sentence_length_hist[text::whitespace_tokens(r.sentence).size()];
        if (const auto p = homograph_position(r.sentence, r.homograph))
            ++s.homograph_position_hist[*p];
        else
            ++s.position_unresolved;
    }
    for (const auto& [homograph, ids] : d.index()) {
        auto inv = inventory_of(d, homograph);
        ++s.phoneme_count_dist[inv.phonemes.size()];
        ++s.homograph_length_hist[text::scalar_count(homograph)];
        s.inventories.push_back(std::move(inv));
    }
    return s;
}

std::string histogram_to_csv(const std::map<std::size_t, std::size_t>& hist) {
    std::string out = "key,count\n";
    for (const auto& [k, v] : hist) out += std::to_string(k) + ',' + std::to_string(v) + '\n';
    return out;
}

std::string inventories_to_csv(const DatasetStats& stats) {
    std::string out = "homograph,phoneme,count\n";
    for (const auto& inv : stats.inventories) {
        for (const auto& label : inv.phonemes) {
            out += text::csv_field(inv.homograph) + ',' + text::csv_field(label) + ',' +
                   std::to_string(inv.counts.at(label)) + '\n';
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

std::size_t stratified_test_count(std::size_t count, double test_fraction) {
    if (count < 2 || test_fraction <= 0.0) return 0;
    const auto raw = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(count)));
    return std::clamp<std::size_t>(raw, 1, count - 1);
}

SplitResult split(const Dataset& d, std::string_view homograph, const SplitSpec& spec) {
    if (!std::isfinite(spec.test_fraction) || spec.test_fraction < 0.0 || spec.test_fraction >= 1.0)
        throw SplitError("test_fraction must lie in [0, 1), got " + std::to_string(spec.test_fraction));
    const auto& ids = d.ids_for(homograph);
    Rng rng(derive_seed(spec.seed, hash_bytes(homograph)));

    SplitResult out;
    auto take = [&](std::vector<RecordId> group, std::size_t n_test) {
        rng.shuffle(std::span<RecordId>(group));
        out.test.insert(out.test.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n_test));
        out.train.insert(out.train.end(), group.begin() + static_cast<std::ptrdiff_t>(n_test), group.end());
    };

    if (spec.stratified) {
        std::map<std::string_view, std::vector<RecordId>> by_label;
        for (RecordId id : ids) by_label[d.at(id).phoneme].push_back(id);
        for (auto& [label, group] : by_label) {
            const auto n_test = stratified_test_count(group.size(), spec.test_fraction);
            take(std::move(group), n_test);
        }
    } else {
        take(ids, stratified_test_count(ids.size(), spec.test_fraction));
    }

    if (out.train.empty()) throw SplitError("split leaves no training records for " + std::string(homograph));
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

}  // namespace hgd
