#include <cmath>

#include "hgd/classifiers.hpp"
#include "hgd/error.hpp"

namespace hgd {

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) n += layer_sizes[l + 1] * (layer_sizes[l] + 1);
    return n;
}

std::vector<double> MlpModel::flatten() const {
    std::vector<double> theta;
    theta.reserve(parameter_count());
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
            for (Eigen::Index c = 0; c < weights[l].cols(); ++c) theta.push_back(weights[l](r, c));
        for (Eigen::Index r = 0; r < biases[l].size(); ++r) theta.push_back(biases[l](r));
    }
    return theta;
}

void MlpModel::unflatten(std::span<const double> theta) {
    if (theta.size() != parameter_count()) throw DimensionError("parameter vector has wrong size");
    std::size_t p = 0;
    weights.resize(layer_sizes.size() - 1);
    biases.resize(layer_sizes.size() - 1);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const auto out = static_cast<Eigen::Index>(layer_sizes[l + 1]);
        const auto in = static_cast<Eigen::Index>(layer_sizes[l]);
        weights[l].resize(out, in);
        biases[l].resize(out);
        for (Eigen::Index r = 0; r < out; ++r)
            for (Eigen::Index c = 0; c < in; ++c) weights[l](r, c) = theta[p++];
        for (Eigen::Index r = 0; r < out; ++r) biases[l](r) = theta[p++];
    }
}

MlpModel mlp_init(std::size_t d, std::size_t c, std::array<std::size_t, 2> hidden, std::uint64_t seed) {
    if (hidden[0] == 0 || hidden[1] == 0) throw ConfigError("hidden layer width must be positive");
    if (d == 0 || c == 0) throw ConfigError("input and output widths must be positive");
    MlpModel m;
    m.layer_sizes = {d, hidden[0], hidden[1], c};
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        const auto in = m.layer_sizes[l];
        const auto out = m.layer_sizes[l + 1];
        const double a = std::sqrt(6.0 / static_cast<double>(in + out));
        Matrix W(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index k = 0; k < W.cols(); ++k) W(r, k) = rng.uniform(-a, a);
        m.weights.push_back(std::move(W));
        m.biases.push_back(ColVector::Zero(static_cast<Eigen::Index>(out)));
    }
    return m;
}

namespace {

void sigmoid_inplace(Matrix& Z) { Z = (1.0 + (-Z.array()).exp()).inverse().matrix(); }

/// Forward pass for a batch. activations[0] = X, activations[L] = softmax.
std::vector<Matrix> forward(const MlpModel& m, const Matrix& X) {
    std::vector<Matrix> acts;
    acts.reserve(m.weights.size() + 1);
    acts.push_back(X);
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        Matrix Z = acts.back() * m.weights[l].transpose();
        Z.rowwise() += m.biases[l].transpose();
        if (l + 1 < m.weights.size()) {
            sigmoid_inplace(Z);
        } else {
            for (Eigen::Index i = 0; i < Z.rows(); ++i) {
                Z.row(i).array() -= Z.row(i).maxCoeff();
                Z.row(i) = Z.row(i).array().exp();
                Z.row(i) /= Z.row(i).sum();
            }
        }
        acts.push_back(std::move(Z));
    }
    return acts;
}

/// Mean negative log-likelihood computed from logits for numerical safety.
double mean_nll(const MlpModel& m, const std::vector<Matrix>& acts, const std::vector<int>& targets) {
    Matrix Z = acts[acts.size() - 2] * m.weights.back().transpose();
    Z.rowwise() += m.biases.back().transpose();
    double nll = 0.0;
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        const double mx = Z.row(i).maxCoeff();
        const double lse = mx + std::log((Z.row(i).array() - mx).exp().sum());
        nll += lse - Z(i, targets[static_cast<std::size_t>(i)]);
    }
    return nll / static_cast<double>(Z.rows());
}

}  // namespace

double mlp_objective(const LabeledSet& data, const MlpModel& shape, std::span<const double> theta, double l2,
                     std::vector<double>* grad) {
    MlpModel m;
    m.layer_sizes = shape.layer_sizes;
    m.unflatten(theta);
    if (m.layer_sizes.front() != data.d() || m.layer_sizes.back() != data.n_labels())
        throw DimensionError("network shape does not match the data");

    const auto acts = forward(m, data.X);
    double loss = mean_nll(m, acts, data.targets);
    for (const auto& W : m.weights) loss += 0.5 * l2 * W.squaredNorm();

    if (grad) {
        const auto n = static_cast<double>(data.n());
        const std::size_t L = m.weights.size();
        std::vector<Matrix> gW(L);
        std::vector<ColVector> gb(L);
        Matrix delta = acts[L];
        for (std::size_t i = 0; i < data.n(); ++i) delta(static_cast<Eigen::Index>(i), data.targets[i]) -= 1.0;
        delta /= n;
        for (std::size_t l = L; l-- > 0;) {
            gW[l] = delta.transpose() * acts[l] + l2 * m.weights[l];
            gb[l] = delta.colwise().sum().transpose();
            if (l > 0) {
                Matrix back = delta * m.weights[l];
                delta = (back.array() * acts[l].array() * (1.0 - acts[l].array())).matrix();
            }
        }
        MlpModel g;
        g.layer_sizes = m.layer_sizes;
        g.weights = std::move(gW);
        g.biases = std::move(gb);
        *grad = g.flatten();
    }
    return loss;
}

MlpModel mlp_fit(const LabeledSet& data, const TrainConfig& cfg, std::array<std::size_t, 2> hidden) {
    if (data.n_labels() < 2) throw FitError("at least two labels required");
    if (!(cfg.learning_rate > 0.0) || cfg.max_iters == 0 || cfg.tol < 0.0 || cfg.l2 < 0.0)
        throw ConfigError("invalid MLP training config");
    MlpModel m = mlp_init(data.d(), data.n_labels(), hidden, cfg.seed);
    m.labels = data.labels;

    std::vector<double> theta = m.flatten();
    std::vector<double> grad;
    double loss = mlp_objective(data, m, theta, cfg.l2, &grad);
    std::size_t it = 0;
    while (it < cfg.max_iters) {
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= cfg.learning_rate * grad[i];
        ++it;
        const double next = mlp_objective(data, m, theta, cfg.l2, &grad);
        if (!std::isfinite(next)) throw FitError("MLP training diverged");
        const double decrease = loss - next;
        loss = next;
        if (decrease < cfg.tol) break;
    }
    m.unflatten(theta);
    m.iterations = it;
    m.final_loss = loss;
    return m;
}

std::vector<double> mlp_proba(const MlpModel& m, std::span<const double> x) {
    if (x.size() != m.layer_sizes.front()) throw DimensionError("query has the wrong number of features");
    Matrix X(1, static_cast<Eigen::Index>(x.size()));
    for (std::size_t j = 0; j < x.size(); ++j) X(0, static_cast<Eigen::Index>(j)) = x[j];
    const auto acts = forward(m, X);
    const auto& p = acts.back();
    return {p.data(), p.data() + p.size()};
}

std::string mlp_predict(const MlpModel& m, std::span<const double> x) {
    return m.labels[argmax_first(mlp_proba(m, x))];
}

}  // namespace hgd
