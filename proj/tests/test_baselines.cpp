#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "crossrank/baselines.hpp"
#include "crossrank/hhcr.hpp"
#include "oracles.hpp"

using namespace crossrank;

namespace {

FeatureSet from_rows(std::vector<std::vector<float>> rows, Modality mod) {
    FeatureSet fs;
    fs.count = rows.size();
    fs.dim = rows.front().size();
    fs.modality = mod;
    for (const auto& r : rows) fs.embeddings.insert(fs.embeddings.end(), r.begin(), r.end());
    fs.person_ids.assign(fs.count, 1);
    fs.camera_ids.assign(fs.count, mod == Modality::visible ? 1 : 2);
    return fs;
}

} // namespace

TEST_CASE("cosine_rank") {
    SECTION("identical and orthogonal singletons") {
        const auto a = from_rows({{1.f, 1.f}}, Modality::visible);
        CHECK(cosine_rank(a, from_rows({{1.f, 1.f}}, Modality::infrared))(0, 0) ==
              Catch::Approx(1.0));
        CHECK(cosine_rank(from_rows({{1.f, 0.f}}, Modality::visible),
                          from_rows({{0.f, 1.f}}, Modality::infrared))(0, 0) ==
              Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("equals hhcr_final with lambda=1 and identity filters") {
        std::mt19937_64 rng(90);
        const FeatureSet xv = oracle::random_features(5, 6, rng);
        const FeatureSet xr = oracle::random_features(4, 6, rng, Modality::infrared);
        HhcrParams p;
        p.lambda = 1.0;
        p.k2 = p.k3 = p.k5 = p.k6 = 1;
        p.k1 = p.k4 = 3;
        const Matrix a = cosine_rank(xv, xr);
        const Matrix b = hhcr_final(xv, xr, p);
        CHECK(oracle::max_abs_diff(oracle::from_matrix(a), b) < 1e-9);
    }
}

TEST_CASE("kreciprocal_rerank") {
    SECTION("a perfect match attains the minimum distance") {
        const auto q = from_rows({{1.f, 0.f, 0.f}}, Modality::visible);
        const auto g = from_rows({{1.f, 0.f, 0.f}, {0.f, 1.f, 0.f}, {0.f, 0.f, 1.f}},
                                 Modality::infrared);
        KReciprocalParams p;
        p.k1 = 2;
        p.k2 = 1;
        const Matrix d = kreciprocal_rerank(q, g, p);
        CHECK(d(0, 0) < d(0, 1));
        CHECK(d(0, 0) < d(0, 2));
    }
    SECTION("lambda=1 returns the original distances bit-exactly") {
        std::mt19937_64 rng(91);
        const FeatureSet q = oracle::random_features(4, 5, rng);
        const FeatureSet g = oracle::random_features(6, 5, rng, Modality::infrared);
        KReciprocalParams p;
        p.k1 = 4;
        p.k2 = 2;
        p.lambda = 1.0;
        const Matrix d = kreciprocal_rerank(q, g, p);
        const Matrix joint_dist = [&] {
            Matrix all(q.count + g.count, q.dim);
            for (std::size_t i = 0; i < q.count * q.dim; ++i)
                all.data()[i] = static_cast<double>(q.embeddings[i]);
            for (std::size_t i = 0; i < g.count * g.dim; ++i)
                all.data()[q.count * q.dim + i] = static_cast<double>(g.embeddings[i]);
            const Matrix cos = cosine_similarity(all, all);
            Matrix out(q.count, g.count);
            for (std::size_t i = 0; i < q.count; ++i)
                for (std::size_t j = 0; j < g.count; ++j)
                    out(i, j) = std::sqrt(std::max(0.0, 2.0 - 2.0 * cos(i, q.count + j)));
            return out;
        }();
        CHECK(d.bit_equal(joint_dist));
    }
    SECTION("matches the set-arithmetic reference") {
        std::mt19937_64 rng(92);
        for (int trial = 0; trial < 8; ++trial) {
            const FeatureSet q = oracle::random_features(4, 5, rng);
            const FeatureSet g = oracle::random_features(8, 5, rng, Modality::infrared);
            KReciprocalParams p;
            p.k1 = 4;
            p.k2 = 2;
            p.lambda = 0.3;
            const Matrix lib = kreciprocal_rerank(q, g, p);
            const auto ref = oracle::kreciprocal(q, g, p);
            CHECK(oracle::max_abs_diff(ref, lib) < 1e-6);
        }
    }
    SECTION("parameter violations are rejected") {
        std::mt19937_64 rng(93);
        const FeatureSet q = oracle::random_features(2, 4, rng);
        const FeatureSet g = oracle::random_features(3, 4, rng, Modality::infrared);
        KReciprocalParams p;
        p.k1 = 2;
        p.k2 = 3; // k2 > k1
        CHECK_THROWS_AS(kreciprocal_rerank(q, g, p), ParameterError);
        p.k2 = 1;
        p.k1 = 5; // k1 >= nq+ng
        CHECK_THROWS_AS(kreciprocal_rerank(q, g, p), ParameterError);
    }
}

TEST_CASE("ecn_rerank") {
    SECTION("two-point hand calculation") {
        const auto q = from_rows({{1.f, 0.f}}, Modality::visible);
        const auto g = from_rows({{0.8f, 0.6f}}, Modality::infrared);
        EcnParams p;
        p.t = 1;
        p.q = 1;
        // joint set {p, g}: each point's expanded list is [other, self];
        // ECN(p,g) = mean(d(g,g), d(g,p), d(p,p), d(p,g)) = d(p,g)/2.
        // Inputs are stored as float32, so the hand value holds to ~1e-7.
        const double d_pg = 1.0 - 0.8;
        const Matrix d = ecn_rerank(q, g, p);
        CHECK(d(0, 0) == Catch::Approx(d_pg / 2.0).margin(1e-6));
    }
    SECTION("identical singletons give zero distance") {
        const auto q = from_rows({{0.5f, 0.5f}}, Modality::visible);
        const auto g = from_rows({{0.5f, 0.5f}}, Modality::infrared);
        EcnParams p;
        p.t = 1;
        p.q = 1;
        CHECK(ecn_rerank(q, g, p)(0, 0) == Catch::Approx(0.0).margin(1e-9));
    }
    SECTION("matches the list-expansion reference") {
        std::mt19937_64 rng(94);
        for (int trial = 0; trial < 8; ++trial) {
            const FeatureSet q = oracle::random_features(5, 4, rng);
            const FeatureSet g = oracle::random_features(6, 4, rng, Modality::infrared);
            EcnParams p;
            p.t = 3;
            p.q = 4;
            const Matrix lib = ecn_rerank(q, g, p);
            const auto ref = oracle::ecn(q, g, p);
            CHECK(oracle::max_abs_diff(ref, lib) < 1e-6);
        }
    }
    SECTION("parameters must fit the joint set") {
        std::mt19937_64 rng(95);
        const FeatureSet q = oracle::random_features(2, 4, rng);
        const FeatureSet g = oracle::random_features(2, 4, rng, Modality::infrared);
        EcnParams p;
        p.t = 4; // t > nq+ng-1
        CHECK_THROWS_AS(ecn_rerank(q, g, p), ParameterError);
        p.t = 1;
        p.q = 4;
        CHECK_THROWS_AS(ecn_rerank(q, g, p), ParameterError);
    }
}

TEST_CASE("baselines are deterministic and gallery-permutation-equivariant") {
    std::mt19937_64 rng(96);
    const FeatureSet q = oracle::random_features(3, 5, rng);
    FeatureSet g = oracle::random_features(5, 5, rng, Modality::infrared);
    KReciprocalParams kp;
    kp.k1 = 3;
    kp.k2 = 2;
    EcnParams ep;
    ep.t = 2;
    ep.q = 2;

    const Matrix kr = kreciprocal_rerank(q, g, kp);
    const Matrix ec = ecn_rerank(q, g, ep);
    CHECK(kr.bit_equal(kreciprocal_rerank(q, g, kp)));
    CHECK(ec.bit_equal(ecn_rerank(q, g, ep)));

    const std::vector<std::size_t> perm{2, 4, 0, 1, 3};
    FeatureSet permuted = g;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        for (std::size_t j = 0; j < g.dim; ++j)
            permuted.embeddings[i * g.dim + j] = g.embeddings[perm[i] * g.dim + j];
        permuted.person_ids[i] = g.person_ids[perm[i]];
    }
    const Matrix kr_p = kreciprocal_rerank(q, permuted, kp);
    const Matrix ec_p = ecn_rerank(q, permuted, ep);
    for (std::size_t i = 0; i < q.count; ++i) {
        for (std::size_t j = 0; j < perm.size(); ++j) {
            CHECK(std::abs(kr_p(i, j) - kr(i, perm[j])) < 1e-12);
            CHECK(std::abs(ec_p(i, j) - ec(i, perm[j])) < 1e-12);
        }
    }
}
