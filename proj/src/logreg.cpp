#include <cmath>

#include "hgd/classifiers.hpp"
#include "hgd/error.hpp"

namespace hgd {

namespace {

/// Row-wise softmax and the mean negative log-likelihood of `targets`.
double softmax_rows(Matrix& Z, const std::vector<int>& targets) {
    double nll = 0.0;
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        const double mx = Z.row(i).maxCoeff();
        Z.row(i).array() -= mx;
        const double lse = std::log(Z.row(i).array().exp().sum());
        nll -= Z(i, targets[static_cast<std::size_t>(i)]) - lse;
        Z.row(i) = (Z.row(i).array() - lse).exp();
    }
    return nll / static_cast<double>(Z.rows());
}

void require_two_labels(const LabeledSet& data) {
    if (data.n_labels() < 2) throw FitError("at least two labels required");
}

}  // namespace

double logreg_objective(const LabeledSet& data, std::span<const double> theta, double l2,
                        std::vector<double>* grad) {
    const auto c = static_cast<Eigen::Index>(data.n_labels());
    const auto d = data.X.cols();
    if (theta.size() != static_cast<std::size_t>(c * d + c)) throw DimensionError("parameter vector has wrong size");
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(theta.data(), c, d);
    const Eigen::Map<const ColVector> b(theta.data() + c * d, c);

    Matrix P = data.X * W.transpose();
    P.rowwise() += b.transpose();
    const double loss = softmax_rows(P, data.targets) + 0.5 * l2 * W.squaredNorm();

    if (grad) {
        const auto n = static_cast<double>(data.n());
        for (std::size_t i = 0; i < data.n(); ++i) P(static_cast<Eigen::Index>(i), data.targets[i]) -= 1.0;
        const Matrix gW = (P.transpose() * data.X) / n + l2 * Matrix(W);
        const ColVector gb = P.colwise().sum().transpose() / n;
        grad->resize(theta.size());
        for (Eigen::Index r = 0; r < c; ++r)
            for (Eigen::Index k = 0; k < d; ++k) (*grad)[static_cast<std::size_t>(r * d + k)] = gW(r, k);
        for (Eigen::Index r = 0; r < c; ++r) (*grad)[static_cast<std::size_t>(c * d + r)] = gb(r);
    }
    return loss;
}

LogRegModel logreg_fit(const LabeledSet& data, const TrainConfig& cfg) {
    require_two_labels(data);
    if (!(cfg.learning_rate > 0.0) || cfg.max_iters == 0 || cfg.tol < 0.0 || cfg.l2 < 0.0)
        throw ConfigError("invalid logistic regression training config");
    const auto c = static_cast<Eigen::Index>(data.n_labels());
    const auto d = data.X.cols();

    std::vector<double> theta(static_cast<std::size_t>(c * d + c), 0.0);
    std::vector<double> grad;
    double loss = logreg_objective(data, theta, cfg.l2, &grad);
    std::size_t it = 0;
    while (it < cfg.max_iters) {
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= cfg.learning_rate * grad[i];
        ++it;
        const double next = logreg_objective(data, theta, cfg.l2, &grad);
        if (!std::isfinite(next)) throw FitError("logistic regression diverged");
        const double decrease = loss - next;
        loss = next;
        if (decrease < cfg.tol) break;
    }

    LogRegModel m;
    m.W.resize(c, d);
    m.b.resize(c);
    for (Eigen::Index r = 0; r < c; ++r)
        for (Eigen::Index k = 0; k < d; ++k) m.W(r, k) = theta[static_cast<std::size_t>(r * d + k)];
    for (Eigen::Index r = 0; r < c; ++r) m.b(r) = theta[static_cast<std::size_t>(c * d + r)];
    m.labels = data.labels;
    m.iterations = it;
    m.final_loss = loss;
    return m;
}

std::vector<double> logreg_proba(const LogRegModel& m, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(m.W.cols())) throw DimensionError("query has the wrong number of features");
    const Eigen::Map<const ColVector> q(x.data(), m.W.cols());
    ColVector z = m.W * q + m.b;
    z.array() -= z.maxCoeff();
    z = z.array().exp();
    z /= z.sum();
    return {z.data(), z.data() + z.size()};
}

std::string logreg_predict(const LogRegModel& m, std::span<const double> x) {
    return m.labels[argmax_first(logreg_proba(m, x))];
}

}  // namespace hgd
