#include "doctest.h"

#include <cmath>
#include <numeric>

#include "hgd/classifiers.hpp"
#include "hgd/error.hpp"
#include "oracles.hpp"

using namespace hgd;

namespace {

struct Fixture {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> y;
    LabeledSet set() const { return LabeledSet::from_rows(rows, y); }
};

/// Random fixture with at least two labels; label names drawn from a small pool.
Fixture random_fixture(Rng& rng, std::size_t n, std::size_t d, std::size_t c) {
    static const char* names[] = {"gel", "gol", "sar", "ser", "sor"};
    Fixture f;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r(d);
        const auto label = i < c ? i : rng.below(c);
        for (auto& x : r) x = rng.normal() + static_cast<double>(label);
        f.rows.push_back(r);
        f.y.push_back(names[label]);
    }
    return f;
}

Fixture integer_grid_fixture(Rng& rng, std::size_t n, std::size_t d, std::size_t c) {
    static const char* names[] = {"a", "b", "c", "d"};
    Fixture f;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> r(d);
        for (auto& x : r) x = static_cast<double>(rng.below(5)) - 2.0;
        f.rows.push_back(r);
        f.y.push_back(names[i < c ? i : rng.below(c)]);
    }
    return f;
}

std::vector<double> random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = scale * rng.normal();
    return v;
}

}  // namespace

TEST_SUITE("classifiers") {

TEST_CASE("labeled set: sorted labels, targets, errors") {
    const auto s = LabeledSet::from_rows(std::vector<std::vector<double>>{{1}, {2}, {3}}, {"sor", "sar", "sor"});
    CHECK(s.labels == std::vector<std::string>{"sar", "sor"});
    CHECK(s.targets == std::vector<int>{1, 0, 1});
    CHECK_THROWS_AS(LabeledSet::from_rows(std::vector<std::vector<double>>{}, {}), FitError);
    CHECK_THROWS_AS(LabeledSet::from_rows(std::vector<std::vector<double>>{{1}}, {"a", "b"}), FitError);
    CHECK_THROWS_AS(LabeledSet::from_rows(std::vector<std::vector<double>>{{NAN}}, {"a"}), FitError);
}

TEST_CASE("finite differences: analytic examples") {
    const std::vector<double> p{1, 2};
    auto sq = [](std::span<const double> t) { return t[0] * t[0] + t[1] * t[1]; };
    auto g = finite_difference_grad(sq, p, 1e-5);
    CHECK(std::abs(g[0] - 2.0) <= 1e-8);
    CHECK(std::abs(g[1] - 4.0) <= 1e-8);

    g = finite_difference_grad([](std::span<const double>) { return 3.5; }, p, 1e-5);
    CHECK(g == std::vector<double>{0.0, 0.0});

    const std::vector<double> q{3, 5};
    g = finite_difference_grad([](std::span<const double> t) { return t[0] * t[1]; }, q, 1e-5);
    CHECK(std::abs(g[0] - 5.0) <= 1e-8);
    CHECK(std::abs(g[1] - 3.0) <= 1e-8);

    CHECK_THROWS_AS(finite_difference_grad([](std::span<const double> t) { return std::log(t[0]); },
                                           std::vector<double>{0.0}, 1e-5),
                    NumericError);
    CHECK_THROWS_AS(finite_difference_grad(sq, p, 0.0), NumericError);
}

// ---------------------------------------------------------------------------

TEST_CASE("knn: unanimous neighbours") {
    Fixture f;
    for (int i = 0; i < 7; ++i) {
        f.rows.push_back({0.1 * i, 0.0});
        f.y.push_back("sar");
    }
    for (int i = 0; i < 5; ++i) {
        f.rows.push_back({10.0 + i, 10.0});
        f.y.push_back("ser");
    }
    const auto m = knn_fit(f.set());
    CHECK(m.k == 7);
    CHECK(knn_predict(m, std::vector<double>{0.3, 0.1}) == "sar");
}

TEST_CASE("knn: single training point") {
    Fixture f{{{1.0, 2.0}}, {"gel"}};
    const auto m = knn_fit(f.set(), 7);
    CHECK(knn_predict(m, std::vector<double>{-100, 55}) == "gel");
    CHECK_THROWS_AS(knn_predict(m, std::vector<double>{1.0}), DimensionError);
    CHECK_THROWS_AS(knn_fit(f.set(), 0), ConfigError);
}

TEST_CASE("knn: vote tie broken by mean distance, then label") {
    // k = 2: one neighbour of each label; the closer one wins.
    Fixture f{{{0.0}, {3.0}}, {"b", "a"}};
    CHECK(knn_predict(knn_fit(f.set(), 2), std::vector<double>{1.0}) == "b");
    // Equidistant: lexicographic label wins.
    CHECK(knn_predict(knn_fit(f.set(), 2), std::vector<double>{1.5}) == "a");
    // Distance tie for the last slot goes to the lower index, not the smaller label.
    Fixture g{{{-1.0}, {1.0}}, {"y", "x"}};
    CHECK(knn_predict(knn_fit(g.set(), 1), std::vector<double>{0.0}) == "y");
}

TEST_CASE("knn: 8-point planar fixture against the exhaustive oracle") {
    const Fixture f{{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {3, 3}, {4, 3}, {3, 4}, {2, 2}},
                    {"gel", "gel", "gol", "gel", "gol", "gol", "gel", "gol"}};
    const auto set = f.set();
    Rng rng(8);
    for (std::size_t k : {1u, 3u, 7u}) {
        const auto m = knn_fit(set, k);
        for (int q = 0; q < 20; ++q) {
            const std::vector<double> x{rng.uniform(-1, 5), rng.uniform(-1, 5)};
            CHECK(knn_predict(m, x) == oracle::knn(f.rows, f.y, k, x));
        }
    }
}

TEST_CASE("property: knn equals the exhaustive oracle on 200 instances") {
    Rng rng(200);
    for (int t = 0; t < 200; ++t) {
        const std::size_t d = 1 + rng.below(4);
        // Half the instances sit on an integer grid so distance and vote ties occur.
        const bool grid = t % 2 == 0;
        const auto f = grid ? integer_grid_fixture(rng, 2 + rng.below(30), d, 2 + rng.below(3))
                            : random_fixture(rng, 2 + rng.below(30), d, 2 + rng.below(3));
        const std::size_t k = 1 + rng.below(9);
        const auto m = knn_fit(f.set(), k);
        for (int q = 0; q < 5; ++q) {
            std::vector<double> x(d);
            for (auto& v : x) v = grid ? static_cast<double>(rng.below(5)) - 2.0 : rng.normal();
            CHECK(knn_predict(m, x) == oracle::knn(f.rows, f.y, k, x));
        }
    }
}

// ---------------------------------------------------------------------------

TEST_CASE("logreg: separable 1-D fixture") {
    Fixture f;
    for (int i = 0; i < 20; ++i) {
        f.rows.push_back({-1.0});
        f.y.push_back("A");
        f.rows.push_back({1.0});
        f.y.push_back("B");
    }
    const auto m = logreg_fit(f.set());
    for (std::size_t i = 0; i < f.rows.size(); ++i) {
        const std::string sign_oracle = f.rows[i][0] < 0 ? "A" : "B";
        CHECK(logreg_predict(m, f.rows[i]) == sign_oracle);
    }
    CHECK(m.iterations >= 1);
    CHECK(m.iterations <= 500);
}

TEST_CASE("logreg: gradient matches finite differences at 50 random points") {
    Rng rng(50);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t d = 1 + rng.below(5), c = 2 + rng.below(3);
        const auto set = random_fixture(rng, 5 + rng.below(20), d, c).set();
        const auto theta = random_vector(rng, set.n_labels() * d + set.n_labels(), 0.5);
        const double l2 = rng.below(2) ? 1e-4 : 0.3;
        std::vector<double> grad;
        logreg_objective(set, theta, l2, &grad);
        const auto numeric = oracle::central_difference(
            [&](const std::vector<double>& th) { return logreg_objective(set, th, l2); }, theta, 1e-5);
        worst = std::max(worst, oracle::relative_error(grad, numeric));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("logreg: identical inputs with balanced labels give a uniform posterior") {
    Fixture f;
    for (int i = 0; i < 10; ++i) {
        f.rows.push_back({0.7, -1.2});
        f.y.push_back(i % 2 ? "A" : "B");
    }
    const auto m = logreg_fit(f.set());
    const auto p = logreg_proba(m, std::vector<double>{0.7, -1.2});
    CHECK(std::abs(p[0] - 0.5) <= 1e-6);
    CHECK(std::abs(p[1] - 0.5) <= 1e-6);
    CHECK(logreg_predict(m, std::vector<double>{0.7, -1.2}) == "A");
}

TEST_CASE("logreg: errors") {
    Fixture f{{{1.0}, {2.0}}, {"A", "A"}};
    try {
        logreg_fit(f.set());
        FAIL("expected FitError");
    } catch (const FitError& e) {
        CHECK(std::string(e.what()).find("at least two labels required") != std::string::npos);
    }
}

TEST_CASE("property: logreg and mlp probabilities are a distribution; fits are deterministic") {
    Rng rng(77);
    for (int t = 0; t < 10; ++t) {
        const auto set = random_fixture(rng, 20, 3, 3).set();
        TrainConfig cfg = TrainConfig::logreg_defaults();
        cfg.max_iters = 50;
        const auto lr = logreg_fit(set, cfg);
        const auto lr2 = logreg_fit(set, cfg);
        CHECK(lr.W == lr2.W);
        CHECK(lr.b == lr2.b);
        TrainConfig mcfg = TrainConfig::mlp_defaults();
        mcfg.max_iters = 20;
        mcfg.seed = static_cast<std::uint64_t>(t);
        const auto mlp = mlp_fit(set, mcfg, {6, 5});
        CHECK(mlp.flatten() == mlp_fit(set, mcfg, {6, 5}).flatten());
        for (int q = 0; q < 20; ++q) {
            const auto x = random_vector(rng, 3, q < 10 ? 1.0 : 1e3);
            for (const auto& p : {logreg_proba(lr, x), mlp_proba(mlp, x)}) {
                double sum = 0.0;
                for (double v : p) {
                    CHECK(v >= 0.0);
                    sum += v;
                }
                CHECK(std::abs(sum - 1.0) <= 1e-9);
            }
        }
    }
}

// ---------------------------------------------------------------------------

TEST_CASE("ridge: 1x1 normal equation") {
    Matrix A(2, 1), T(2, 1);
    A << 1, 2;
    T << -1, 1;
    const Matrix w = ridge_solve(A, T, 1.0);
    CHECK(std::abs(w(0, 0) - 1.0 / 6.0) <= 1e-12);
}

TEST_CASE("ridge: huge alpha shrinks weights and falls back to the target means") {
    Rng rng(1);
    Fixture f;
    for (int i = 0; i < 30; ++i) {
        f.rows.push_back(random_vector(rng, 3));
        f.y.push_back(i < 5 ? "gel" : (i < 20 ? "gol" : "gul"));  // 5 / 15 / 10
    }
    const auto set = f.set();
    const auto m = ridge_fit(set, 1e12);
    CHECK(m.W.cwiseAbs().maxCoeff() < 1e-6);
    // Target means: (2 * count - n) / n, ordered gol > gul > gel.
    const auto T = ridge_targets(set);
    for (std::size_t c = 0; c < set.n_labels(); ++c)
        CHECK(std::abs(m.b(static_cast<Eigen::Index>(c)) - T.col(static_cast<Eigen::Index>(c)).mean()) < 1e-6);
    for (int q = 0; q < 20; ++q) CHECK(ridge_predict(m, random_vector(rng, 3)) == "gol");
}

TEST_CASE("property: ridge normal-equation residual below 1e-8 on 100 fixtures") {
    Rng rng(100);
    for (int t = 0; t < 100; ++t) {
        const auto set = random_fixture(rng, 5 + rng.below(40), 1 + rng.below(8), 2 + rng.below(3)).set();
        const double alpha = std::exp(rng.uniform(-3, 3));
        const auto m = ridge_fit(set, alpha);
        CHECK(ridge_normal_residual(set, m) < 1e-8);

        // Independent check of the same contract with an explicit centring.
        Matrix Xc = set.X.rowwise() - set.X.colwise().mean();
        Matrix T = ridge_targets(set);
        Matrix Tc = T.rowwise() - T.colwise().mean();
        const Matrix lhs = (Xc.transpose() * Xc + alpha * Matrix::Identity(set.X.cols(), set.X.cols())) *
                               m.W.transpose() -
                           Xc.transpose() * Tc;
        CHECK(lhs.cwiseAbs().maxCoeff() < 1e-8);
    }
}

// ---------------------------------------------------------------------------

TEST_CASE("mlp: gradient matches finite differences at init and after 10 steps") {
    Rng rng(20);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t d = 1 + rng.below(5), c = 2 + rng.below(2);
        const auto set = random_fixture(rng, 6 + rng.below(10), d, c).set();
        TrainConfig cfg = TrainConfig::mlp_defaults();
        cfg.seed = rng.next_u64();
        cfg.max_iters = 10;
        cfg.tol = 0.0;
        cfg.learning_rate = 0.5;
        const auto init = mlp_init(d, set.n_labels(), {4, 3}, cfg.seed);
        const auto trained = mlp_fit(set, cfg, {4, 3});
        CHECK(trained.iterations == 10);
        for (const auto* net : {&init, &trained}) {
            const double l2 = t % 2 ? 0.0 : 0.01;
            const auto theta = net->flatten();
            std::vector<double> grad;
            mlp_objective(set, *net, theta, l2, &grad);
            const auto numeric = oracle::central_difference(
                [&](const std::vector<double>& th) { return mlp_objective(set, *net, th, l2); }, theta, 1e-5);
            worst = std::max(worst, oracle::relative_error(grad, numeric));
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("mlp: Glorot-uniform init, zero biases") {
    const auto m = mlp_init(5, 3, {4, 3}, 1);
    CHECK(m.layer_sizes == std::vector<std::size_t>{5, 4, 3, 3});
    CHECK(m.parameter_count() == 5 * 4 + 4 + 4 * 3 + 3 + 3 * 3 + 3);
    for (std::size_t l = 0; l < 3; ++l) {
        const double a = std::sqrt(6.0 / static_cast<double>(m.layer_sizes[l] + m.layer_sizes[l + 1]));
        CHECK(m.weights[l].cwiseAbs().maxCoeff() <= a);
        CHECK(m.biases[l].isZero());
    }
    CHECK_THROWS_AS(mlp_init(5, 3, {0, 3}, 1), ConfigError);
}

TEST_CASE("mlp: XOR is learned") {
    Fixture f;
    for (int i = 0; i < 25; ++i) {
        f.rows.insert(f.rows.end(), {{0, 0}, {1, 1}, {0, 1}, {1, 0}});
        f.y.insert(f.y.end(), {"A", "A", "B", "B"});
    }
    TrainConfig cfg{0.5, 5000, 0.0, 0.0, 42};
    const auto m = mlp_fit(f.set(), cfg, {8, 8});
    std::size_t correct = 0;
    for (std::size_t i = 0; i < f.rows.size(); ++i) correct += mlp_predict(m, f.rows[i]) == f.y[i];
    CHECK(static_cast<double>(correct) / f.rows.size() >= 0.95);
}

TEST_CASE("mlp: identical inputs with balanced labels give a uniform posterior") {
    Fixture f;
    for (int i = 0; i < 10; ++i) {
        f.rows.push_back({0.3, 0.3, -2.0});
        f.y.push_back(i % 2 ? "A" : "B");
    }
    TrainConfig cfg = TrainConfig::mlp_defaults();
    cfg.max_iters = 3000;
    cfg.tol = 0.0;
    cfg.learning_rate = 0.5;
    const auto m = mlp_fit(f.set(), cfg, {5, 5});
    const auto p = mlp_proba(m, f.rows[0]);
    CHECK(std::abs(p[0] - 0.5) <= 1e-6);
    CHECK(std::abs(p[1] - 0.5) <= 1e-6);
}

TEST_CASE("mlp: flatten/unflatten round trip") {
    auto m = mlp_init(3, 2, {4, 2}, 9);
    const auto theta = m.flatten();
    auto other = mlp_init(3, 2, {4, 2}, 10);
    CHECK(other.flatten() != theta);
    other.unflatten(theta);
    CHECK(other.flatten() == theta);
}

// ---------------------------------------------------------------------------

TEST_CASE("gini: pure and balanced nodes") {
    CHECK(gini(std::vector<std::size_t>{7, 0}) == 0.0);
    CHECK(gini(std::vector<std::size_t>{0, 0, 12}) == 0.0);
    CHECK(gini(std::vector<std::size_t>{5, 5}) == 0.5);
    CHECK(gini(std::vector<std::size_t>{}) == 0.0);
}

TEST_CASE("forest: single-label data") {
    Fixture f{{{1, 2}, {3, 4}, {5, 6}}, {"gel", "gel", "gel"}};
    const auto m = forest_fit(f.set(), 10, 0);
    Rng rng(1);
    for (int q = 0; q < 10; ++q) CHECK(forest_predict(m, random_vector(rng, 2, 10)) == "gel");
    for (const auto& t : m.trees) CHECK(t.nodes.size() == 1);
}

TEST_CASE("forest: 1-D threshold fixture at 100% training accuracy") {
    Fixture f;
    Rng rng(30);
    for (int i = 0; i < 30; ++i) {
        f.rows.push_back({-rng.uniform(0.01, 5.0)});
        f.y.push_back("gel");
        f.rows.push_back({rng.uniform(0.01, 5.0)});
        f.y.push_back("gol");
    }
    const auto m = forest_fit(f.set(), 100, 0);
    CHECK(m.trees.size() == 100);
    for (std::size_t i = 0; i < f.rows.size(); ++i) CHECK(forest_predict(m, f.rows[i]) == f.y[i]);
}

TEST_CASE("forest: structure invariants and determinism") {
    Rng rng(4);
    const auto f = random_fixture(rng, 60, 5, 3);
    const auto a = forest_fit(f.set(), 20, 11);
    const auto b = forest_fit(f.set(), 20, 11);
    CHECK(a.trees == b.trees);
    const auto c = forest_fit(f.set(), 20, 12);
    CHECK(a.trees != c.trees);
    for (const auto& t : a.trees) {
        for (const auto& n : t.nodes) {
            const auto total = std::accumulate(n.counts.begin(), n.counts.end(), std::size_t{0});
            CHECK(total > 0);
            if (!n.is_leaf()) {
                REQUIRE(n.left > 0);
                REQUIRE(n.right > 0);
                const auto& l = t.nodes[static_cast<std::size_t>(n.left)].counts;
                const auto& r = t.nodes[static_cast<std::size_t>(n.right)].counts;
                for (std::size_t k = 0; k < n.counts.size(); ++k) CHECK(l[k] + r[k] == n.counts[k]);
            }
        }
    }
    for (int q = 0; q < 20; ++q) {
        const auto x = random_vector(rng, 5);
        CHECK(forest_predict(a, x) == forest_predict(b, x));
    }
}

TEST_CASE("forest: split ties go to the lowest feature") {
    // Two identical features; the root must split on feature 0.
    Fixture f{{{0, 0}, {1, 1}, {2, 2}, {3, 3}}, {"a", "a", "b", "b"}};
    const auto set = f.set();
    std::vector<std::size_t> sample{0, 1, 2, 3};
    Rng rng(0);
    const auto t = grow_tree(set, sample, rng);
    REQUIRE_FALSE(t.nodes[0].is_leaf());
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold == 1.5);
}

TEST_CASE("forest: errors") {
    Fixture f{{{1.0}}, {"a"}};
    CHECK_THROWS_AS(forest_fit(f.set(), 0, 0), ConfigError);
    CHECK_THROWS_AS(forest_predict(forest_fit(f.set(), 1, 0), std::vector<double>{1, 2}), DimensionError);
}

}  // TEST_SUITE
