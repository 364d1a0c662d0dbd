#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hgd/random.hpp"

namespace hgd {

using Matrix = Eigen::MatrixXd;
using ColVector = Eigen::VectorXd;

/// Feature matrix (one row per sample) with string labels. `labels` is the
/// sorted distinct label list and `targets[i]` indexes into it.
struct LabeledSet {
    Matrix X;
    std::vector<std::string> y;
    std::vector<std::string> labels;
    std::vector<int> targets;

    /// Validates shapes and derives `labels`/`targets`. Throws FitError on an
    /// empty set or a row count mismatch.
    static LabeledSet make(Matrix X, std::vector<std::string> y);
    static LabeledSet from_rows(std::span<const std::vector<double>> rows, std::vector<std::string> y);

    std::size_t n() const { return static_cast<std::size_t>(X.rows()); }
    std::size_t d() const { return static_cast<std::size_t>(X.cols()); }
    std::size_t n_labels() const { return labels.size(); }
};

struct TrainConfig {
    double learning_rate = 0.1;
    std::size_t max_iters = 500;
    double tol = 1e-6;
    double l2 = 1e-4;
    std::uint64_t seed = 0;

    static TrainConfig logreg_defaults() { return {0.1, 500, 1e-6, 1e-4, 0}; }
    static TrainConfig mlp_defaults() { return {0.05, 300, 1e-7, 0.0, 0}; }
};

/// Index of the largest score; ties go to the lowest index, which is the
/// lexicographically smallest label because labels are sorted.
std::size_t argmax_first(std::span<const double> scores);

// ---------------------------------------------------------------------------
// k-nearest neighbours

struct KnnModel {
    std::size_t k = 7;
    Matrix X;
    std::vector<int> targets;
    std::vector<std::string> labels;
};

KnnModel knn_fit(const LabeledSet& data, std::size_t k = 7);
std::string knn_predict(const KnnModel& m, std::span<const double> x);

// ---------------------------------------------------------------------------
// Multinomial logistic regression

struct LogRegModel {
    Matrix W;     // c x d
    ColVector b;  // c
    std::vector<std::string> labels;
    /// Iterations actually run and the final training objective.
    std::size_t iterations = 0;
    double final_loss = 0.0;
};

/// Objective (mean cross-entropy + l2/2 ||W||^2) and its gradient at the
/// flattened parameters theta = [W row-major, b].
double logreg_objective(const LabeledSet& data, std::span<const double> theta, double l2,
                        std::vector<double>* grad = nullptr);

LogRegModel logreg_fit(const LabeledSet& data, const TrainConfig& cfg = TrainConfig::logreg_defaults());
std::vector<double> logreg_proba(const LogRegModel& m, std::span<const double> x);
std::string logreg_predict(const LogRegModel& m, std::span<const double> x);

// ---------------------------------------------------------------------------
// Ridge classifier

struct RidgeModel {
    double alpha = 1.0;
    Matrix W;  // c x d
    ColVector b;
    std::vector<std::string> labels;
    ColVector feature_means;
};

/// Solves (A^T A + alpha I) W = A^T T by Cholesky. A is n x d, T is n x c.
Matrix ridge_solve(const Matrix& A, const Matrix& T, double alpha);

/// One-vs-rest +/-1 targets before centring. n x c.
Matrix ridge_targets(const LabeledSet& data);

RidgeModel ridge_fit(const LabeledSet& data, double alpha = 1.0);
std::vector<double> ridge_decision(const RidgeModel& m, std::span<const double> x);
std::string ridge_predict(const RidgeModel& m, std::span<const double> x);

/// max_c ||(Xc^T Xc + alpha I) w_c - Xc^T tc||_inf for a fitted model.
double ridge_normal_residual(const LabeledSet& data, const RidgeModel& m);

// ---------------------------------------------------------------------------
// Multilayer perceptron: sigmoid, sigmoid, softmax

struct MlpModel {
    std::vector<std::size_t> layer_sizes;  // {d, h1, h2, c}
    std::vector<Matrix> weights;           // weights[l] is out x in
    std::vector<ColVector> biases;
    std::vector<std::string> labels;
    std::size_t iterations = 0;
    double final_loss = 0.0;

    std::size_t parameter_count() const;
    std::vector<double> flatten() const;
    void unflatten(std::span<const double> theta);
};

/// Glorot-uniform weights and zero biases drawn from cfg.seed.
MlpModel mlp_init(std::size_t d, std::size_t c, std::array<std::size_t, 2> hidden, std::uint64_t seed);

/// Mean cross-entropy + l2/2 sum ||W_l||^2 at the parameters of `shape`
/// replaced by theta (layout of MlpModel::flatten).
double mlp_objective(const LabeledSet& data, const MlpModel& shape, std::span<const double> theta, double l2,
                     std::vector<double>* grad = nullptr);

MlpModel mlp_fit(const LabeledSet& data, const TrainConfig& cfg = TrainConfig::mlp_defaults(),
                 std::array<std::size_t, 2> hidden = {100, 100});
std::vector<double> mlp_proba(const MlpModel& m, std::span<const double> x);
std::string mlp_predict(const MlpModel& m, std::span<const double> x);

// ---------------------------------------------------------------------------
// Random forest (Gini)

struct TreeNode {
    /// -1 for leaves.
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    /// Per-label sample counts reaching this node (bootstrap multiplicity).
    std::vector<std::size_t> counts;

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct ForestModel {
    std::size_t n_trees = 100;
    std::uint64_t seed = 0;
    std::size_t dim = 0;
    std::vector<DecisionTree> trees;
    std::vector<std::string> labels;
};

/// 1 - sum p^2 over label proportions; 0 for an empty node.
double gini(std::span<const std::size_t> counts);

/// Grows one tree on `sample` (row indices, repeats allowed).
DecisionTree grow_tree(const LabeledSet& data, std::span<const std::size_t> sample, Rng& rng);

ForestModel forest_fit(const LabeledSet& data, std::size_t n_trees = 100, std::uint64_t seed = 0);
/// Label index voted by one tree.
std::size_t tree_vote(const DecisionTree& t, std::span<const double> x);
std::string forest_predict(const ForestModel& m, std::span<const double> x);

// ---------------------------------------------------------------------------

/// Central differences: (f(theta + h e_i) - f(theta - h e_i)) / 2h.
std::vector<double> finite_difference_grad(const std::function<double(std::span<const double>)>& loss,
                                           std::span<const double> theta, double h);

}  // namespace hgd
