#include <algorithm>
#include <cmath>
#include <numeric>

#include "hgd/classifiers.hpp"
#include "hgd/error.hpp"

namespace hgd {

KnnModel knn_fit(const LabeledSet& data, std::size_t k) {
    if (k == 0) throw ConfigError("k must be at least 1");
    if (data.n() == 0) throw FitError("empty training set");
    return KnnModel{k, data.X, data.targets, data.labels};
}

std::string knn_predict(const KnnModel& m, std::span<const double> x) {
    const auto n = static_cast<std::size_t>(m.X.rows());
    const auto d = static_cast<std::size_t>(m.X.cols());
    if (x.size() != d)
        throw DimensionError("query has " + std::to_string(x.size()) + " features, model expects " +
                             std::to_string(d));
    const Eigen::Map<const ColVector> q(x.data(), static_cast<Eigen::Index>(d));

    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = (m.X.row(static_cast<Eigen::Index>(i)).transpose() - q).norm();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t k = std::min(m.k, n);
    // Stable on index, so equal distances keep the lower record first.
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });

    std::vector<std::size_t> votes(m.labels.size(), 0);
    std::vector<double> dist_sum(m.labels.size(), 0.0);
    for (std::size_t r = 0; r < k; ++r) {
        const auto label = static_cast<std::size_t>(m.targets[order[r]]);
        ++votes[label];
        dist_sum[label] += dist[order[r]];
    }

    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c) {
        if (votes[c] > votes[best]) {
            best = c;
        } else if (votes[c] == votes[best] && votes[c] > 0) {
            const double mean_c = dist_sum[c] / static_cast<double>(votes[c]);
            const double mean_best = dist_sum[best] / static_cast<double>(votes[best]);
            if (mean_c < mean_best) best = c;
        }
    }
    return m.labels[best];
}

}  // namespace hgd
