#include <cmath>

#include "hgd/classifiers.hpp"
#include "hgd/error.hpp"

namespace hgd {

Matrix ridge_solve(const Matrix& A, const Matrix& T, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("ridge alpha must be positive and finite");
    if (A.rows() != T.rows()) throw DimensionError("ridge design and target row counts differ");
    Matrix gram = A.transpose() * A;
    gram.diagonal().array() += alpha;
    const Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericError("ridge normal matrix is not positive definite");
    return llt.solve(A.transpose() * T);
}

Matrix ridge_targets(const LabeledSet& data) {
    Matrix T = Matrix::Constant(data.X.rows(), static_cast<Eigen::Index>(data.n_labels()), -1.0);
    for (std::size_t i = 0; i < data.n(); ++i) T(static_cast<Eigen::Index>(i), data.targets[i]) = 1.0;
    return T;
}

namespace {

struct Centered {
    Matrix Xc;
    Matrix Tc;
    ColVector x_mean;
    ColVector t_mean;
};

Centered center(const LabeledSet& data) {
    Centered c;
    c.x_mean = data.X.colwise().mean().transpose();
    c.Xc = data.X.rowwise() - c.x_mean.transpose();
    const Matrix T = ridge_targets(data);
    c.t_mean = T.colwise().mean().transpose();
    c.Tc = T.rowwise() - c.t_mean.transpose();
    return c;
}

}  // namespace

RidgeModel ridge_fit(const LabeledSet& data, double alpha) {
    if (data.n_labels() < 2) throw FitError("at least two labels required");
    const auto c = center(data);
    const Matrix Wt = ridge_solve(c.Xc, c.Tc, alpha);  // d x labels

    RidgeModel m;
    m.alpha = alpha;
    m.W = Wt.transpose();
    m.b = c.t_mean - m.W * c.x_mean;
    m.labels = data.labels;
    m.feature_means = c.x_mean;
    return m;
}

std::vector<double> ridge_decision(const RidgeModel& m, std::span<const double> x) {
    if (x.size() != static_cast<std::size_t>(m.W.cols())) throw DimensionError("query has the wrong number of features");
    const Eigen::Map<const ColVector> q(x.data(), m.W.cols());
    const ColVector s = m.W * q + m.b;
    return {s.data(), s.data() + s.size()};
}

std::string ridge_predict(const RidgeModel& m, std::span<const double> x) {
    return m.labels[argmax_first(ridge_decision(m, x))];
}

double ridge_normal_residual(const LabeledSet& data, const RidgeModel& m) {
    const auto c = center(data);
    Matrix gram = c.Xc.transpose() * c.Xc;
    gram.diagonal().array() += m.alpha;
    const Matrix R = gram * m.W.transpose() - c.Xc.transpose() * c.Tc;
    return R.cwiseAbs().maxCoeff();
}

}  // namespace hgd
