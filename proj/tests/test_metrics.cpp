#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "crossrank/metrics.hpp"
#include "oracles.hpp"

using namespace crossrank;

namespace {

struct LabeledInstance {
    Matrix sim;
    std::vector<std::int64_t> q_ids, g_ids, q_cams, g_cams;
};

LabeledInstance random_instance(std::size_t nq, std::size_t ng, std::mt19937_64& rng,
                                std::int64_t max_id = 5) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<std::int64_t> ids(1, max_id);
    LabeledInstance inst;
    inst.sim = Matrix(nq, ng);
    for (auto& v : inst.sim.data()) v = u(rng);
    for (std::size_t i = 0; i < nq; ++i) {
        inst.q_ids.push_back(ids(rng));
        inst.q_cams.push_back(1);
    }
    for (std::size_t j = 0; j < ng; ++j) {
        inst.g_ids.push_back(ids(rng));
        inst.g_cams.push_back(2);
    }
    return inst;
}

} // namespace

TEST_CASE("rank_gallery") {
    SECTION("descending order") {
        const RankingResult r = rank_gallery(Matrix{{0.2, 0.9, 0.5}});
        CHECK(r.order[0] == std::vector<std::size_t>{1, 2, 0});
        CHECK(r.scores[0] == std::vector<double>{0.9, 0.5, 0.2});
    }
    SECTION("ties break toward the lower gallery index") {
        const RankingResult r = rank_gallery(Matrix{{0.5, 0.5}});
        CHECK(r.order[0] == std::vector<std::size_t>{0, 1});
    }
    SECTION("matches per-row sort reference") {
        std::mt19937_64 rng(50);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Matrix sim(4, 6);
        for (auto& v : sim.data()) v = u(rng);
        const RankingResult r = rank_gallery(sim);
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t pos = 0; pos + 1 < 6; ++pos) {
                CHECK(sim(i, r.order[i][pos]) >= sim(i, r.order[i][pos + 1]));
            }
        }
    }
    SECTION("empty matrix rejected") {
        CHECK_THROWS_AS(rank_gallery(Matrix{}), DimensionError);
    }
}

TEST_CASE("evaluate hand cases") {
    SECTION("single relevant item at rank 1") {
        const Matrix sim{{0.9, 0.1, 0.2, 0.3, 0.4}};
        const std::vector<std::int64_t> q_ids{1}, g_ids{1, 2, 3, 4, 5}, q_cams{1},
            g_cams{2, 2, 2, 2, 2};
        const EvalReport r = evaluate(sim, q_ids, g_ids, q_cams, g_cams);
        CHECK(r.map == 1.0);
        CHECK(r.rank1 == 1.0);
        CHECK(r.minp == 1.0);
        CHECK(r.num_queries_evaluated == 1);
    }
    SECTION("relevant at ranks 1 and 3") {
        const Matrix sim{{0.9, 0.5, 0.6, 0.1}};
        const std::vector<std::int64_t> q_ids{1}, g_ids{1, 1, 2, 3}, q_cams{1},
            g_cams{2, 2, 2, 2};
        const EvalReport r = evaluate(sim, q_ids, g_ids, q_cams, g_cams);
        CHECK(std::abs(r.map - 5.0 / 6.0) < 1e-15);
        CHECK(r.minp == 2.0 / 3.0);
        CHECK(r.rank1 == 1.0);
    }
    SECTION("same-identity same-camera items are excluded") {
        const Matrix sim{{0.99, 0.5, 0.1}};
        const std::vector<std::int64_t> q_ids{1}, g_ids{1, 1, 2}, q_cams{1}, g_cams{1, 2, 2};
        // the top-scoring gallery item shares id and camera: must be dropped
        const EvalReport r = evaluate(sim, q_ids, g_ids, q_cams, g_cams);
        CHECK(r.rank1 == 1.0);
        CHECK(r.map == 1.0);
        CHECK(r.cmc.size() == 3);
    }
    SECTION("queries without valid relevant items are skipped") {
        const Matrix sim{{0.9, 0.1}, {0.8, 0.2}};
        const std::vector<std::int64_t> q_ids{1, 9}, g_ids{1, 2}, q_cams{1, 1}, g_cams{2, 2};
        const EvalReport r = evaluate(sim, q_ids, g_ids, q_cams, g_cams);
        CHECK(r.num_queries_evaluated == 1);
    }
    SECTION("all queries skipped raises") {
        const Matrix sim{{0.9, 0.1}};
        const std::vector<std::int64_t> q_ids{7}, g_ids{1, 2}, q_cams{1}, g_cams{2, 2};
        CHECK_THROWS_AS(evaluate(sim, q_ids, g_ids, q_cams, g_cams), EvaluationError);
    }
}

TEST_CASE("evaluate matches the brute-force loop on random instances") {
    std::mt19937_64 rng(60);
    for (int trial = 0; trial < 60; ++trial) {
        const auto inst = random_instance(6, 20, rng);
        EvalReport lib;
        try {
            lib = evaluate(inst.sim, inst.q_ids, inst.g_ids, inst.q_cams, inst.g_cams);
        } catch (const EvaluationError&) {
            continue; // no valid queries in this draw
        }
        const auto ref = oracle::evaluate(oracle::from_matrix(inst.sim), inst.q_ids, inst.g_ids,
                                          inst.q_cams, inst.g_cams);
        REQUIRE(lib.num_queries_evaluated == ref.evaluated);
        CHECK(std::abs(lib.map - ref.map) < 1e-9);
        CHECK(std::abs(lib.minp - ref.minp) < 1e-9);
        for (std::size_t k = 0; k < lib.cmc.size(); ++k) {
            CHECK(std::abs(lib.cmc[k] - ref.cmc[k]) < 1e-9);
        }
    }
}

TEST_CASE("CMC is monotone and saturates") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = random_instance(5, 12, rng, 3);
        EvalReport r;
        try {
            r = evaluate(inst.sim, inst.q_ids, inst.g_ids, inst.q_cams, inst.g_cams);
        } catch (const EvaluationError&) {
            continue;
        }
        for (std::size_t k = 1; k < r.cmc.size(); ++k) CHECK(r.cmc[k] >= r.cmc[k - 1]);
        CHECK(r.cmc.back() == Catch::Approx(1.0));
        CHECK(r.rank1 == r.cmc.front());
        CHECK(r.map >= 0.0);
        CHECK(r.map <= 1.0);
        CHECK(r.minp >= 0.0);
        CHECK(r.minp <= 1.0);
    }
}

TEST_CASE("evaluation depends only on score order") {
    std::mt19937_64 rng(62);
    const auto inst = random_instance(5, 15, rng);
    EvalReport base;
    try {
        base = evaluate(inst.sim, inst.q_ids, inst.g_ids, inst.q_cams, inst.g_cams);
    } catch (const EvaluationError&) {
        SUCCEED("degenerate draw");
        return;
    }
    Matrix warped = inst.sim;
    for (auto& v : warped.data()) v = std::exp(3.0 * v) + 2.0; // strictly increasing map
    const EvalReport after = evaluate(warped, inst.q_ids, inst.g_ids, inst.q_cams, inst.g_cams);
    CHECK(base.map == after.map);
    CHECK(base.minp == after.minp);
    CHECK(base.cmc == after.cmc);
}

TEST_CASE("perfect ranking yields mAP 1") {
    // all relevant above all irrelevant for every query
    const Matrix sim{{0.9, 0.8, 0.2, 0.1}, {0.7, 0.9, 0.1, 0.3}};
    const std::vector<std::int64_t> q_ids{1, 1}, g_ids{1, 1, 2, 3}, q_cams{1, 1},
        g_cams{2, 2, 2, 2};
    const EvalReport r = evaluate(sim, q_ids, g_ids, q_cams, g_cams);
    CHECK(r.map == Catch::Approx(1.0));
}

TEST_CASE("report serialization is stable") {
    const Matrix sim{{0.9, 0.5, 0.6, 0.1}};
    const std::vector<std::int64_t> q_ids{1}, g_ids{1, 1, 2, 3}, q_cams{1}, g_cams{2, 2, 2, 2};
    const EvalReport r = evaluate(sim, q_ids, g_ids, q_cams, g_cams);
    const std::string a = to_json(r);
    CHECK(a == to_json(r));
    CHECK(a.find("\"rank1\"") < a.find("\"mAP\""));
    CHECK(a.find("\"mAP\"") < a.find("\"cmc\""));
    const std::string text = to_kv_text(r);
    CHECK(text.find("mAP\t0.833333") != std::string::npos);
    CHECK(text.find("rank1\t1.000000") != std::string::npos);
}
