#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hgd/classifiers.hpp"
#include "hgd/error.hpp"

namespace hgd {

double gini(std::span<const std::size_t> counts) {
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
};

std::vector<std::size_t> label_counts(const LabeledSet& data, std::span<const std::size_t> rows) {
    std::vector<std::size_t> counts(data.n_labels(), 0);
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(data.targets[r])];
    return counts;
}

/// Best weighted-Gini split over `features` (ascending), scanning midpoints
/// between consecutive distinct values. Strict improvement keeps the lowest
/// feature and threshold on ties.
SplitChoice best_split(const LabeledSet& data, std::span<const std::size_t> rows,
                       std::span<const std::size_t> features) {
    SplitChoice best;
    best.impurity = std::numeric_limits<double>::infinity();
    const std::size_t n = rows.size();
    const std::size_t c = data.n_labels();
    std::vector<std::size_t> sorted(rows.begin(), rows.end());
    std::vector<std::size_t> left(c), right(c);

    for (std::size_t f : features) {
        const auto col = static_cast<Eigen::Index>(f);
        std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
            return data.X(static_cast<Eigen::Index>(a), col) < data.X(static_cast<Eigen::Index>(b), col);
        });
        std::fill(left.begin(), left.end(), 0);
        right = label_counts(data, sorted);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto label = static_cast<std::size_t>(data.targets[sorted[i]]);
            ++left[label];
            --right[label];
            const double v = data.X(static_cast<Eigen::Index>(sorted[i]), col);
            const double next = data.X(static_cast<Eigen::Index>(sorted[i + 1]), col);
            if (!(v < next)) continue;
            double thr = v + (next - v) / 2.0;
            if (!(thr < next)) thr = v;
            const double nl = static_cast<double>(i + 1);
            const double nr = static_cast<double>(n - i - 1);
            const double impurity = (nl * gini(left) + nr * gini(right)) / static_cast<double>(n);
            if (impurity < best.impurity) {
                best = {static_cast<int>(f), thr, impurity};
            }
        }
    }
    return best;
}

}  // namespace

DecisionTree grow_tree(const LabeledSet& data, std::span<const std::size_t> sample, Rng& rng) {
    const std::size_t d = data.d();
    const auto n_candidates =
        std::min<std::size_t>(d, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d)))));
    std::vector<std::size_t> feature_pool(d);

    DecisionTree tree;
    struct Pending {
        std::size_t node;
        std::vector<std::size_t> rows;
    };
    std::vector<Pending> stack;
    tree.nodes.push_back({});
    stack.push_back({0, std::vector<std::size_t>(sample.begin(), sample.end())});

    while (!stack.empty()) {
        Pending job = std::move(stack.back());
        stack.pop_back();
        auto counts = label_counts(data, job.rows);
        const double parent = gini(counts);
        tree.nodes[job.node].counts = counts;

        const bool pure = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
        if (pure || job.rows.size() < 2) continue;

        // Partial Fisher-Yates draws n_candidates distinct features.
        std::iota(feature_pool.begin(), feature_pool.end(), 0);
        for (std::size_t i = 0; i < n_candidates; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(d - i));
            std::swap(feature_pool[i], feature_pool[j]);
        }
        std::vector<std::size_t> features(feature_pool.begin(),
                                          feature_pool.begin() + static_cast<std::ptrdiff_t>(n_candidates));
        std::sort(features.begin(), features.end());

        const auto choice = best_split(data, job.rows, features);
        if (choice.feature < 0 || !(choice.impurity < parent)) continue;

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : job.rows) {
            if (data.X(static_cast<Eigen::Index>(r), choice.feature) <= choice.threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        const auto left_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        auto& node = tree.nodes[job.node];
        node.feature = choice.feature;
        node.threshold = choice.threshold;
        node.left = left_id;
        node.right = left_id + 1;
        // Right pushed first so the left subtree is expanded first.
        stack.push_back({static_cast<std::size_t>(left_id + 1), std::move(right_rows)});
        stack.push_back({static_cast<std::size_t>(left_id), std::move(left_rows)});
    }
    return tree;
}

ForestModel forest_fit(const LabeledSet& data, std::size_t n_trees, std::uint64_t seed) {
    if (n_trees == 0) throw ConfigError("forest needs at least one tree");
    if (data.n() == 0) throw FitError("empty training set");
    ForestModel m;
    m.n_trees = n_trees;
    m.seed = seed;
    m.dim = data.d();
    m.labels = data.labels;
    m.trees.reserve(n_trees);
    const std::size_t n = data.n();
    std::vector<std::size_t> sample(n);
    for (std::size_t t = 0; t < n_trees; ++t) {
        Rng rng(derive_seed(seed, t));
        for (auto& s : sample) s = static_cast<std::size_t>(rng.below(n));
        m.trees.push_back(grow_tree(data, sample, rng));
    }
    return m;
}

std::size_t tree_vote(const DecisionTree& t, std::span<const double> x) {
    std::size_t node = 0;
    while (!t.nodes[node].is_leaf()) {
        const auto& nd = t.nodes[node];
        node = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
    }
    const auto& counts = t.nodes[node].counts;
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::string forest_predict(const ForestModel& m, std::span<const double> x) {
    if (x.size() != m.dim) throw DimensionError("query has the wrong number of features");
    std::vector<double> votes(m.labels.size(), 0.0);
    for (const auto& t : m.trees) votes[tree_vote(t, x)] += 1.0;
    return m.labels[argmax_first(votes)];
}

}  // namespace hgd
