#include "doctest.h"

#include <cmath>
#include <sstream>

#include "hgd/embeddings.hpp"
#include "hgd/error.hpp"
#include "oracles.hpp"

using namespace hgd;

namespace {

EmbeddingStore random_store(Rng& rng) {
    const std::size_t dim = 1 + rng.below(8);
    const auto pooling = rng.below(2) ? PoolingStrategy::LastLayer : PoolingStrategy::AvgLastFour;
    std::vector<EmbeddingRecord> recs;
    const auto n = rng.below(20);
    for (std::size_t i = 0; i < n; ++i) {
        EmbeddingRecord r;
        r.record_id = i * 3 + rng.below(3);
        r.homograph = rng.below(2) ? "سر" : "hg\"x\\";
        r.phoneme = rng.below(2) ? "\\emAl" : "sar";
        r.vector.resize(dim);
        for (auto& x : r.vector) {
            switch (rng.below(5)) {
                case 0: x = rng.normal() * 1e-300; break;
                case 1: x = rng.normal() * 1e300; break;
                case 2: x = -0.0; break;
                default: x = rng.normal(); break;
            }
        }
        recs.push_back(std::move(r));
    }
    return EmbeddingStore(dim, pooling, "model/" + std::to_string(rng.below(100)), std::move(recs));
}

SynthSpec two_class_spec(std::size_t dim, std::size_t per_class, double sep, double sigma, std::uint64_t seed) {
    SynthSpec s;
    s.dim = dim;
    s.class_separation = sep;
    s.noise_sigma = sigma;
    s.seed = seed;
    s.inventories = {{"گل", {{"gel", per_class}, {"gol", per_class}}}};
    return s;
}

}  // namespace

TEST_SUITE("embeddings") {

TEST_CASE("store: single record round trip") {
    EmbeddingStore s(4, PoolingStrategy::LastLayer, "m", {{0, "سر", "sar", {0.1, -2.5, 3e-8, 1.0 / 3.0}}});
    const auto text = store_to_string(s);
    CHECK(text.rfind("{\"format\":\"hgd-emb/1\",\"dim\":4,\"pooling\":\"last_layer\",\"model\":\"m\"}\n", 0) == 0);
    CHECK(read_store_string(text) == s);
}

TEST_CASE("store: record dimension mismatch names the record") {
    const std::string text =
        "{\"format\":\"hgd-emb/1\",\"dim\":4,\"pooling\":\"last_layer\",\"model\":\"m\"}\n"
        "{\"id\":0,\"homograph\":\"a\",\"phoneme\":\"x\",\"vector\":[1,2,3,4]}\n"
        "{\"id\":17,\"homograph\":\"a\",\"phoneme\":\"y\",\"vector\":[1,2,3]}\n";
    try {
        read_store_string(text);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.record_id() == 17);
        CHECK(std::string(e.what()).find("17") != std::string::npos);
    }
}

TEST_CASE("store: empty record list is valid") {
    const auto s = read_store_string("{\"format\":\"hgd-emb/1\",\"dim\":3,\"pooling\":\"avg_last4\",\"model\":\"m\"}\n");
    CHECK(s.size() == 0);
    CHECK(s.dim() == 3);
    CHECK(s.pooling() == PoolingStrategy::AvgLastFour);
}

TEST_CASE("store: malformed input") {
    CHECK_THROWS_AS(read_store_string(""), FormatError);
    CHECK_THROWS_AS(read_store_string("{\"format\":\"hgd-emb/1\",\"dim\":3,\"pooling\":\"cls\",\"model\":\"m\"}\n"),
                    FormatError);
    CHECK_THROWS_AS(read_store_string("{\"format\":\"hgd-emb/2\",\"dim\":3,\"pooling\":\"avg_last4\",\"model\":\"m\"}\n"),
                    FormatError);
    const std::string full =
        "{\"format\":\"hgd-emb/1\",\"dim\":2,\"pooling\":\"last_layer\",\"model\":\"m\"}\n"
        "{\"id\":0,\"homograph\":\"a\",\"phoneme\":\"x\",\"vector\":[1,2]}\n";
    CHECK_NOTHROW(read_store_string(full));
    const auto header_end = full.find('\n') + 1;
    for (std::size_t cut = 1; cut < full.size(); ++cut) {
        if (cut == header_end) continue;  // header alone is a valid empty store
        CHECK_THROWS_AS(read_store_string(full.substr(0, cut)), FormatError);
    }
    CHECK_THROWS_AS(read_store_string(full + full.substr(full.find('\n') + 1)), FormatError);  // duplicate id
}

TEST_CASE("property: 100 random stores round trip exactly and re-serialize byte-identically") {
    Rng rng(2024);
    for (int t = 0; t < 100; ++t) {
        const auto s = random_store(rng);
        const auto text = store_to_string(s);
        const auto back = read_store_string(text);
        REQUIRE(back == s);
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t k = 0; k < s.dim(); ++k)
                CHECK(std::signbit(back.records()[i].vector[k]) == std::signbit(s.records()[i].vector[k]));
        CHECK(store_to_string(back) == text);
    }
}

TEST_CASE("cosine: analytic cases") {
    const std::vector<double> e1{1, 0}, e2{0, 1}, d{1, 1};
    CHECK(cosine(e1, e1) == 1.0);
    CHECK(cosine(e1, e2) == 0.0);
    CHECK(std::abs(cosine(d, e1) - 0.7071067811865475) <= 1e-12);
    CHECK(cosine(e1, std::vector<double>{-3, 0}) == -1.0);
    CHECK_THROWS_AS(cosine(e1, std::vector<double>{1, 0, 0}), DimensionError);
    CHECK_THROWS_AS(cosine(e1, std::vector<double>{0, 0}), DegenerateVectorError);
}

TEST_CASE("property: cosine symmetry and positive scale invariance") {
    Rng rng(7);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t dim = 1 + rng.below(32);
        std::vector<double> u(dim), v(dim), au(dim), bv(dim);
        const double a = std::exp(rng.uniform(-5, 5)), b = std::exp(rng.uniform(-5, 5));
        for (std::size_t k = 0; k < dim; ++k) {
            u[k] = rng.normal();
            v[k] = rng.normal();
            au[k] = a * u[k];
            bv[k] = b * v[k];
        }
        const double c = cosine(u, v);
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
        CHECK(std::abs(c - cosine(v, u)) <= 1e-12 * std::max(1.0, std::abs(c)));
        CHECK(std::abs(c - cosine(au, bv)) <= 1e-12 * std::max(1.0, std::abs(c)));
    }
}

TEST_CASE("mean pairwise cosine: examples") {
    CHECK(mean_pairwise_cosine(std::vector<Vector>{{0.6, 0.8}, {0.6, 0.8}}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(mean_pairwise_cosine(std::vector<Vector>{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})) <= 1e-15);

    const double r = 1.0 / std::sqrt(2.0);
    const std::vector<Vector> three{{1, 0}, {0, 1}, {r, r}};
    const double expected = oracle::mean_pairwise_cosine(three);
    CHECK(std::abs(expected - 0.4714045) <= 1e-7);
    CHECK(std::abs(mean_pairwise_cosine(three) - expected) <= 1e-9);

    CHECK_THROWS_AS(mean_pairwise_cosine(std::vector<Vector>{{1, 0}}), InsufficientDataError);
    try {
        mean_pairwise_cosine(std::vector<Vector>{{1, 0}, {0, 1}, {0, 0}});
        FAIL("expected DegenerateVectorError");
    } catch (const DegenerateVectorError& e) {
        CHECK(e.index() == 2);
    }
}

TEST_CASE("property: n copies of one vector have mean cosine 1") {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        Vector v(1 + rng.below(16));
        for (auto& x : v) x = rng.normal() * std::exp(rng.uniform(-20, 20));
        const std::vector<Vector> copies(2 + rng.below(10), v);
        CHECK(std::abs(mean_pairwise_cosine(copies) - 1.0) <= 1e-12);
    }
}

TEST_CASE("property: mean pairwise cosine agrees with pair enumeration") {
    Rng rng(31);
    for (int t = 0; t < 200; ++t) {
        const std::size_t dim = 1 + rng.below(10);
        std::vector<Vector> vs(2 + rng.below(12), Vector(dim));
        for (auto& v : vs)
            for (auto& x : v) x = rng.normal();
        CHECK(std::abs(mean_pairwise_cosine(vs) - oracle::mean_pairwise_cosine(vs)) <= 1e-12);
    }
}

TEST_CASE("synthetic: zero noise gives identical vectors within a class") {
    const auto s = generate_synthetic_store(two_class_spec(8, 10, 10.0, 0.0, 1));
    REQUIRE(s.size() == 20);
    for (std::size_t i = 1; i < 10; ++i) CHECK(s.records()[i].vector == s.records()[0].vector);
    for (std::size_t i = 11; i < 20; ++i) CHECK(s.records()[i].vector == s.records()[10].vector);
    CHECK(oracle::euclidean(s.records()[0].vector, s.records()[10].vector) >= 10.0);
}

TEST_CASE("synthetic: ids dense, labels aligned with the synthetic dataset") {
    SynthSpec spec = two_class_spec(4, 3, 5.0, 0.2, 9);
    spec.inventories.push_back({"سر", {{"sar", 2}, {"ser", 1}, {"sor", 4}}});
    const auto s = generate_synthetic_store(spec);
    const auto d = synthetic_dataset(spec);
    REQUIRE(s.size() == d.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s.records()[i].record_id == i);
        CHECK(s.records()[i].homograph == d.at(i).homograph);
        CHECK(s.records()[i].phoneme == d.at(i).phoneme);
        CHECK(d.at(i).sentence.find(d.at(i).homograph) != std::string::npos);
    }
}

TEST_CASE("synthetic: same spec twice gives byte-identical stores, other seed differs") {
    SynthSpec spec;
    spec.dim = 12;
    spec.noise_sigma = 0.3;
    spec.inventories = reference_shaped_inventories(3);
    spec.seed = 77;
    const auto a = store_to_string(generate_synthetic_store(spec));
    CHECK(a == store_to_string(generate_synthetic_store(spec)));
    spec.seed = 78;
    CHECK(a != store_to_string(generate_synthetic_store(spec)));
}

TEST_CASE("synthetic: reference-shaped inventories") {
    const auto inv = reference_shaped_inventories(5);
    REQUIRE(inv.size() == 82);
    std::map<std::size_t, std::size_t> dist;
    for (const auto& i : inv) ++dist[i.counts.size()];
    CHECK(dist == std::map<std::size_t, std::size_t>{{2, 71}, {3, 10}, {4, 1}});
}

TEST_CASE("synthetic: separation 10, sigma 0.1, dim 8, 2x50 is perfectly 1-NN separable") {
    const auto s = generate_synthetic_store(two_class_spec(8, 50, 10.0, 0.1, 0));
    std::vector<oracle::Row> X;
    std::vector<std::string> y;
    for (const auto& r : s.records()) {
        X.push_back(r.vector);
        y.push_back(r.phoneme);
    }
    CHECK(oracle::loo_1nn_accuracy(X, y) == 1.0);
}

TEST_CASE("synthetic: class means are at least the separation apart") {
    Rng rng(5);
    for (std::size_t classes : {2u, 3u, 4u, 9u}) {
        for (std::size_t dim : {2u, 3u, 8u}) {
            const auto means = synthetic_class_means(dim, classes, 10.0, rng);
            REQUIRE(means.size() == classes);
            for (std::size_t i = 0; i < classes; ++i)
                for (std::size_t j = i + 1; j < classes; ++j) CHECK(oracle::euclidean(means[i], means[j]) >= 10.0);
        }
    }
}

TEST_CASE("synthetic: empirical class mean within 3 sigma / sqrt(n)") {
    // Each coordinate of the n = 1000 sample mean is N(mu, sigma^2 / n), so a
    // 3 sigma / sqrt(n) bound holds with probability 0.9973 per coordinate.
    // Over 50 seeds x 2 classes x 4 coordinates we expect about one excursion;
    // more than 5 (binomial tail < 0.5%) or any beyond 4.5 sigma fails.
    const std::size_t n = 1000;
    const double sigma = 0.5;
    const double bound = sigma / std::sqrt(static_cast<double>(n));
    std::size_t excursions = 0, coords = 0;
    double sum_z2 = 0.0, worst = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto spec = two_class_spec(4, n, 10.0, sigma, seed);
        const auto s = generate_synthetic_store(spec);
        Rng rng(derive_seed(spec.seed, 0));
        const auto means = synthetic_class_means(spec.dim, 2, spec.class_separation, rng);
        for (std::size_t c = 0; c < 2; ++c) {
            for (std::size_t k = 0; k < spec.dim; ++k) {
                double sum = 0.0;
                for (std::size_t i = 0; i < n; ++i) sum += s.records()[c * n + i].vector[k];
                const double z = std::abs(sum / n - means[c][k]) / bound;
                excursions += z > 3.0;
                worst = std::max(worst, z);
                sum_z2 += z * z;
                ++coords;
            }
        }
    }
    CHECK(excursions <= 5);
    CHECK(worst < 4.5);
    CHECK(std::abs(sum_z2 / coords - 1.0) < 0.25);  // sample-mean variance is sigma^2 / n
}

TEST_CASE("synthetic: spec errors") {
    CHECK_THROWS_AS(generate_synthetic_store(two_class_spec(1, 3, 1.0, 0.1, 0)), ConfigError);
    CHECK_NOTHROW(generate_synthetic_store(two_class_spec(1, 3, 0.0, 0.1, 0)));
    CHECK_THROWS_AS(generate_synthetic_store(two_class_spec(4, 3, 1.0, -0.1, 0)), ConfigError);
    CHECK_THROWS_AS(generate_synthetic_store(two_class_spec(4, 3, NAN, 0.1, 0)), ConfigError);
    CHECK_THROWS_AS(parse_synth_spec("[1,2]"), ConfigError);
    CHECK_THROWS_AS(parse_synth_spec("{\"dim\":"), ConfigError);
}

TEST_CASE("synthetic: JSON spec") {
    const auto s = parse_synth_spec(
        R"({"dim":6,"noise_sigma":0.25,"class_separation":3,"seed":9,"pooling":"avg_last4","model":"m",)"
        R"("inventories":[{"homograph":"سر","phonemes":{"sar":2,"ser":3}}]})");
    CHECK(s.dim == 6);
    CHECK(s.noise_sigma == 0.25);
    CHECK(s.class_separation == 3.0);
    CHECK(s.seed == 9);
    CHECK(s.pooling == PoolingStrategy::AvgLastFour);
    CHECK(s.model_id == "m");
    REQUIRE(s.inventories.size() == 1);
    CHECK(s.inventories[0].counts == std::map<std::string, std::size_t>{{"sar", 2}, {"ser", 3}});
}

}  // TEST_SUITE
