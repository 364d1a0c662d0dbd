#include "hgd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <exception>
#include <set>
#include <thread>

#include "hgd/error.hpp"
#include "hgd/io.hpp"
#include "hgd/text.hpp"

namespace hgd {

Metrics compute_metrics(std::span<const std::string> y_true, std::span<const std::string> y_pred) {
    if (y_true.size() != y_pred.size())
        throw ArgumentError("y_true and y_pred lengths differ (" + std::to_string(y_true.size()) + " vs " +
                            std::to_string(y_pred.size()) + ")");
    if (y_true.empty()) throw ArgumentError("metrics need at least one prediction");

    struct Tally {
        std::size_t tp = 0, predicted = 0, actual = 0;
    };
    std::map<std::string_view, Tally> tallies;
    for (const auto& t : y_true) ++tallies[t].actual;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == y_pred[i]) {
            ++correct;
            ++tallies[y_true[i]].tp;
        }
        if (auto it = tallies.find(y_pred[i]); it != tallies.end()) ++it->second.predicted;
    }

    Metrics m;
    m.support = y_true.size();
    m.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());
    for (const auto& [label, t] : tallies) {
        const double p = t.predicted ? static_cast<double>(t.tp) / static_cast<double>(t.predicted) : 0.0;
        const double r = static_cast<double>(t.tp) / static_cast<double>(t.actual);
        const double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        m.precision_macro += p;
        m.recall_macro += r;
        m.f1_macro += f;
    }
    const auto k = static_cast<double>(tallies.size());
    m.precision_macro /= k;
    m.recall_macro /= k;
    m.f1_macro /= k;
    return m;
}

LabeledSet labeled_subset(const Dataset& d, const EmbeddingStore& store, std::span<const RecordId> ids) {
    Matrix X(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(store.dim()));
    std::vector<std::string> y;
    y.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto* rec = store.find(ids[i]);
        if (!rec) throw ArgumentError("store has no vector for record " + std::to_string(ids[i]));
        for (std::size_t j = 0; j < store.dim(); ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rec->vector[j];
        y.push_back(d.at(ids[i]).phoneme);
    }
    return LabeledSet::make(std::move(X), std::move(y));
}

namespace {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be written
/// to per-index slots; the first failing index (lowest) is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    auto run = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const std::size_t workers = std::min(std::max<std::size_t>(jobs, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) run(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) run(i);
            });
        }
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

bool store_covers(const EmbeddingStore& store, const Dataset& d, const std::vector<RecordId>& ids) {
    return std::all_of(ids.begin(), ids.end(), [&](RecordId id) {
        const auto* rec = store.find(id);
        return rec && rec->homograph == d.at(id).homograph;
    });
}

std::string metric_csv_line(const std::string& name, const Metrics& m, std::size_t homographs) {
    return text::csv_field(name) + ',' + io::format_double(m.accuracy) + ',' + io::format_double(m.recall_macro) +
           ',' + io::format_double(m.f1_macro) + ',' + io::format_double(m.precision_macro) + ',' +
           std::to_string(homographs) + '\n';
}

struct Candidate {
    std::string homograph;
    std::size_t phoneme_count = 0;
    std::size_t records = 0;
};

/// Homographs eligible for training, plus the excluded ones with reasons.
std::vector<Candidate> candidates(const Dataset& d, std::span<const EmbeddingStore* const> stores,
                                  std::vector<ExcludedHomograph>& excluded) {
    std::vector<Candidate> out;
    bool any_overlap = false;
    for (const auto& [homograph, ids] : d.index()) {
        bool covered = true;
        for (const auto* s : stores) {
            if (std::any_of(ids.begin(), ids.end(), [&](RecordId id) { return s->find(id) != nullptr; }))
                any_overlap = true;
            covered = covered && store_covers(*s, d, ids);
        }
        const auto n_phonemes = d.phonemes_for(homograph).size();
        if (!covered) {
            excluded.push_back({homograph, "missing-vectors"});
        } else if (n_phonemes < 2) {
            excluded.push_back({homograph, "single-phoneme"});
        } else {
            out.push_back({homograph, n_phonemes, ids.size()});
        }
    }
    if (!any_overlap) throw ArgumentError("dataset and embedding store share no records");
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ModelComparisonReport run_model_comparison(const Dataset& d, const EmbeddingStore& store,
                                           std::span<const ModelConfig> models, const SplitSpec& spec,
                                           const ModelComparisonOptions& options) {
    if (models.empty()) throw ArgumentError("no models requested");
    ModelComparisonReport report;
    report.split = spec;
    report.store_id = store.model_id() + ":" + std::string(to_string(store.pooling()));
    report.weighted = options.weighted;

    const EmbeddingStore* stores[] = {&store};
    const auto cands = candidates(d, stores, report.excluded);

    struct Outcome {
        std::vector<Metrics> per_model;
        std::string failure;
    };
    std::vector<Outcome> outcomes(cands.size());
    parallel_for(cands.size(), options.jobs, [&](std::size_t i) {
        const auto& h = cands[i].homograph;
        SplitResult parts;
        try {
            parts = split(d, h, spec);
        } catch (const SplitError& e) {
            outcomes[i].failure = std::string("split-failed: ") + e.what();
            return;
        }
        if (parts.test.empty()) {
            outcomes[i].failure = "empty-test-split";
            return;
        }
        const auto train = labeled_subset(d, store, parts.train);
        const auto test = labeled_subset(d, store, parts.test);
        for (const auto& cfg : models) {
            const auto model = fit_model(cfg, train);
            std::vector<std::string> pred;
            pred.reserve(test.n());
            std::vector<double> x(test.d());
            for (std::size_t r = 0; r < test.n(); ++r) {
                for (std::size_t j = 0; j < test.d(); ++j)
                    x[j] = test.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
                pred.push_back(predict(model, x));
            }
            outcomes[i].per_model.push_back(compute_metrics(test.y, pred));
        }
    });

    for (std::size_t i = 0; i < cands.size(); ++i)
        if (!outcomes[i].failure.empty()) report.excluded.push_back({cands[i].homograph, outcomes[i].failure});
    std::sort(report.excluded.begin(), report.excluded.end(),
              [](const auto& a, const auto& b) { return a.homograph < b.homograph; });

    for (std::size_t m = 0; m < models.size(); ++m) {
        ModelComparisonRow row;
        row.model = std::string(to_string(models[m].kind));
        double weight_total = 0.0;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (!outcomes[i].failure.empty()) continue;
            const auto& met = outcomes[i].per_model[m];
            row.per_homograph.emplace_back(cands[i].homograph, met);
            const double w = options.weighted ? static_cast<double>(cands[i].records) : 1.0;
            row.mean.accuracy += w * met.accuracy;
            row.mean.precision_macro += w * met.precision_macro;
            row.mean.recall_macro += w * met.recall_macro;
            row.mean.f1_macro += w * met.f1_macro;
            row.mean.support += met.support;
            weight_total += w;
        }
        row.homographs = row.per_homograph.size();
        if (weight_total > 0.0) {
            row.mean.accuracy /= weight_total;
            row.mean.precision_macro /= weight_total;
            row.mean.recall_macro /= weight_total;
            row.mean.f1_macro /= weight_total;
        }
        report.rows.push_back(std::move(row));
    }
    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [](const auto& a, const auto& b) { return a.model < b.model; });
    return report;
}

std::string to_csv(const ModelComparisonReport& r) {
    std::string out = "model,accuracy,recall,f1,precision,homographs\n";
    for (const auto& row : r.rows) out += metric_csv_line(row.model, row.mean, row.homographs);
    return out;
}

// ---------------------------------------------------------------------------

const EmbeddingComparisonCell& EmbeddingComparisonReport::cell(std::size_t phoneme_count,
                                                               std::string_view store) const {
    for (const auto& c : cells)
        if (c.phoneme_count == phoneme_count && c.store == store) return c;
    throw LookupError("no cell for phoneme count " + std::to_string(phoneme_count) + " and store " +
                      std::string(store));
}

EmbeddingComparisonReport run_embedding_comparison(const Dataset& d, const EmbeddingStore& store_last,
                                                   const EmbeddingStore& store_avg4, const SplitSpec& spec,
                                                   const EmbeddingComparisonOptions& options) {
    {
        std::vector<RecordId> missing;
        for (const auto& r : store_last.records())
            if (!store_avg4.find(r.record_id)) missing.push_back(r.record_id);
        for (const auto& r : store_avg4.records())
            if (!store_last.find(r.record_id)) missing.push_back(r.record_id);
        if (!missing.empty()) {
            std::sort(missing.begin(), missing.end());
            std::string msg = "stores cover different record ids; missing from one store:";
            for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += ' ' + std::to_string(missing[i]);
            if (missing.size() > 20) msg += " ... (" + std::to_string(missing.size()) + " total)";
            throw ArgumentError(msg);
        }
        if (store_last.dim() != store_avg4.dim()) throw ArgumentError("stores have different dimensions");
    }

    EmbeddingComparisonReport report;
    report.split = spec;
    const EmbeddingStore* stores[] = {&store_last, &store_avg4};
    const auto cands = candidates(d, stores, report.excluded);

    struct Outcome {
        double acc_last = 0.0;
        double acc_avg4 = 0.0;
        std::string failure;
    };
    std::vector<Outcome> outcomes(cands.size());
    const auto cfg = ModelConfig::defaults(ModelKind::Mlp, options.seed);

    parallel_for(cands.size(), options.jobs, [&](std::size_t i) {
        SplitResult parts;
        try {
            parts = split(d, cands[i].homograph, spec);
        } catch (const SplitError& e) {
            outcomes[i].failure = std::string("split-failed: ") + e.what();
            return;
        }
        if (parts.test.empty()) {
            outcomes[i].failure = "empty-test-split";
            return;
        }
        auto accuracy_with = [&](const EmbeddingStore& s) {
            const auto train = labeled_subset(d, s, parts.train);
            const auto test = labeled_subset(d, s, parts.test);
            const auto model = fit_model(cfg, train);
            std::vector<std::string> pred;
            std::vector<double> x(test.d());
            for (std::size_t r = 0; r < test.n(); ++r) {
                for (std::size_t j = 0; j < test.d(); ++j)
                    x[j] = test.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
                pred.push_back(predict(model, x));
            }
            return compute_metrics(test.y, pred).accuracy;
        };
        outcomes[i].acc_last = accuracy_with(store_last);
        outcomes[i].acc_avg4 = accuracy_with(store_avg4);
    });

    std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (!outcomes[i].failure.empty()) {
            report.excluded.push_back({cands[i].homograph, outcomes[i].failure});
            continue;
        }
        auto& g = groups[cands[i].phoneme_count];
        g.first.push_back(outcomes[i].acc_last);
        g.second.push_back(outcomes[i].acc_avg4);
    }
    std::sort(report.excluded.begin(), report.excluded.end(),
              [](const auto& a, const auto& b) { return a.homograph < b.homograph; });

    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    for (const auto& [count, accs] : groups) {
        report.cells.push_back({count, std::string(to_string(PoolingStrategy::AvgLastFour)), mean(accs.second),
                                accs.second.size()});
        report.cells.push_back({count, std::string(to_string(PoolingStrategy::LastLayer)), mean(accs.first),
                                accs.first.size()});
    }
    return report;
}

std::string to_csv(const EmbeddingComparisonReport& r) {
    std::string out = "phoneme_count,store,mean_accuracy,homographs\n";
    for (const auto& c : r.cells) {
        out += std::to_string(c.phoneme_count) + ',' + c.store + ',' + io::format_double(c.mean_accuracy) + ',' +
               std::to_string(c.homographs) + '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(PairFilter f) {
    switch (f) {
        case PairFilter::All: return "all";
        case PairFilter::WithinPhoneme: return "within-phoneme";
        case PairFilter::CrossPhoneme: return "cross-phoneme";
    }
    return "all";
}

PairFilter parse_pair_filter(std::string_view s) {
    if (s == "all") return PairFilter::All;
    if (s == "within-phoneme") return PairFilter::WithinPhoneme;
    if (s == "cross-phoneme") return PairFilter::CrossPhoneme;
    throw ConfigError("unknown pair filter: " + std::string(s));
}

double CosineReport::bin_left(std::size_t i) {
    return (2.0 * static_cast<double>(i) - static_cast<double>(kCosineBins)) / static_cast<double>(kCosineBins);
}

double CosineReport::bin_right(std::size_t i) { return bin_left(i + 1); }

std::size_t cosine_bin(double value) {
    const double scaled = std::floor((value + 1.0) * static_cast<double>(kCosineBins) / 2.0);
    auto idx = static_cast<std::ptrdiff_t>(std::clamp(scaled, 0.0, static_cast<double>(kCosineBins - 1)));
    // Correct for rounding in the scaled estimate against the exact edges.
    while (idx + 1 < static_cast<std::ptrdiff_t>(kCosineBins) &&
           value >= CosineReport::bin_left(static_cast<std::size_t>(idx + 1)))
        ++idx;
    while (idx > 0 && value < CosineReport::bin_left(static_cast<std::size_t>(idx))) --idx;
    return static_cast<std::size_t>(idx);
}

CosineReport run_cosine_analysis(const EmbeddingStore& store, PairFilter pairs) {
    CosineReport report;
    report.pooling = store.pooling();
    report.pairs = pairs;
    report.histogram.assign(kCosineBins, 0);

    for (const auto& [homograph, ids] : store.index()) {
        std::vector<const EmbeddingRecord*> recs;
        for (RecordId id : ids) {
            const auto* r = store.find(id);
            double norm_sq = 0.0;
            for (double x : r->vector) norm_sq += x * x;
            if (norm_sq == 0.0)
                throw DegenerateVectorError(static_cast<std::int64_t>(id),
                                            "record " + std::to_string(id) + " has a zero-norm vector");
            recs.push_back(r);
        }
        if (recs.size() < 2) {
            report.excluded.push_back({homograph, "fewer-than-2-vectors"});
            continue;
        }
        double mean = 0.0;
        if (pairs == PairFilter::All) {
            std::vector<Vector> vectors;
            for (const auto* r : recs) vectors.push_back(r->vector);
            mean = mean_pairwise_cosine(vectors);
        } else {
            double total = 0.0;
            std::size_t n = 0;
            for (std::size_t i = 0; i < recs.size(); ++i) {
                for (std::size_t j = i + 1; j < recs.size(); ++j) {
                    const bool same = recs[i]->phoneme == recs[j]->phoneme;
                    if (same != (pairs == PairFilter::WithinPhoneme)) continue;
                    total += cosine(recs[i]->vector, recs[j]->vector);
                    ++n;
                }
            }
            if (n == 0) {
                report.excluded.push_back({homograph, "no-qualifying-pairs"});
                continue;
            }
            mean = total / static_cast<double>(n);
        }
        report.per_homograph.emplace_back(homograph, mean);
        ++report.histogram[cosine_bin(mean)];
    }
    return report;
}

std::string per_homograph_csv(const CosineReport& r) {
    std::string out = "homograph,mean_cosine\n";
    for (const auto& [h, v] : r.per_homograph) out += text::csv_field(h) + ',' + io::format_double(v) + '\n';
    return out;
}

std::string histogram_csv(const CosineReport& r) {
    std::string out = "bin_left,bin_right,count\n";
    for (std::size_t i = 0; i < kCosineBins; ++i) {
        out += io::format_double(CosineReport::bin_left(i)) + ',' + io::format_double(CosineReport::bin_right(i)) +
               ',' + std::to_string(r.histogram[i]) + '\n';
    }
    return out;
}

}  // namespace hgd
