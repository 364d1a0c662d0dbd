#include <algorithm>
#include <cmath>
#include <set>

#include "hgd/classifiers.hpp"
#include "hgd/error.hpp"

namespace hgd {

LabeledSet LabeledSet::make(Matrix X, std::vector<std::string> y) {
    if (X.rows() == 0 || y.empty()) throw FitError("empty training set");
    if (static_cast<std::size_t>(X.rows()) != y.size())
        throw FitError("feature rows (" + std::to_string(X.rows()) + ") and labels (" + std::to_string(y.size()) +
                       ") differ");
    if (!X.allFinite()) throw FitError("non-finite feature value");
    LabeledSet s;
    s.X = std::move(X);
    std::set<std::string> distinct(y.begin(), y.end());
    s.labels.assign(distinct.begin(), distinct.end());
    s.targets.reserve(y.size());
    for (const auto& label : y) {
        const auto it = std::lower_bound(s.labels.begin(), s.labels.end(), label);
        s.targets.push_back(static_cast<int>(it - s.labels.begin()));
    }
    s.y = std::move(y);
    return s;
}

LabeledSet LabeledSet::from_rows(std::span<const std::vector<double>> rows, std::vector<std::string> y) {
    if (rows.empty()) throw FitError("empty training set");
    const auto d = rows.front().size();
    Matrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != d) throw FitError("row " + std::to_string(i) + " has a different length");
        for (std::size_t j = 0; j < d; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return make(std::move(X), std::move(y));
}

std::size_t argmax_first(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

std::vector<double> finite_difference_grad(const std::function<double(std::span<const double>)>& loss,
                                           std::span<const double> theta, double h) {
    if (!(h > 0.0)) throw NumericError("finite-difference step must be positive");
    std::vector<double> point(theta.begin(), theta.end());
    std::vector<double> grad(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        point[i] = theta[i] + h;
        const double up = loss(point);
        point[i] = theta[i] - h;
        const double down = loss(point);
        point[i] = theta[i];
        if (!std::isfinite(up) || !std::isfinite(down))
            throw NumericError("non-finite loss near component " + std::to_string(i));
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace hgd
