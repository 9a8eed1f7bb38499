#pragma once

// =============================================================================
// Retrieval evaluation: CMC curve (Rank-k), mean Average Precision and mean
// Inverse Negative Penalty over a query × gallery score matrix with identity
// and camera labels. Standard re-identification protocol: gallery items that
// share both the query's identity and camera are excluded per query; queries
// left without any relevant item are skipped.
// =============================================================================

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crossrank/errors.hpp"
#include "crossrank/feature_set.hpp"
#include "crossrank/matrix.hpp"

namespace crossrank {

/// Per-query gallery permutation, best match first, with the scores in ranked order.
struct RankingResult {
    std::vector<std::vector<std::size_t>> order;
    std::vector<std::vector<double>> scores;
};

namespace detail {

/// Gallery indices of one score row, best first. Descending score when
/// higher_is_better, ascending otherwise; ties break toward the lower index.
inline std::vector<std::size_t> rank_row(const double* row, std::size_t ng,
                                         bool higher_is_better) {
    std::vector<std::size_t> idx(ng);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [row, higher_is_better](std::size_t a, std::size_t b) {
        if (row[a] != row[b]) return higher_is_better ? row[a] > row[b] : row[a] < row[b];
        return a < b;
    });
    return idx;
}

} // namespace detail

inline RankingResult rank_gallery(const Matrix& sim, bool higher_is_better = true) {
    if (sim.empty()) {
        throw DimensionError("rank_gallery: score matrix must be non-empty");
    }
    RankingResult out;
    out.order.resize(sim.rows());
    out.scores.resize(sim.rows());
    for (std::size_t i = 0; i < sim.rows(); ++i) {
        out.order[i] = detail::rank_row(sim.row(i), sim.cols(), higher_is_better);
        out.scores[i].reserve(sim.cols());
        for (std::size_t j : out.order[i]) out.scores[i].push_back(sim(i, j));
    }
    return out;
}

struct EvalReport {
    std::vector<double> cmc; // cmc[k-1] = Rank-k accuracy
    double rank1 = 0.0;
    double rank5 = 0.0;
    double rank10 = 0.0;
    double rank20 = 0.0;
    double map = 0.0;
    double minp = 0.0;
    std::size_t num_queries_evaluated = 0;
};

inline EvalReport evaluate(const Matrix& sim, std::span<const std::int64_t> q_ids,
                           std::span<const std::int64_t> g_ids,
                           std::span<const std::int64_t> q_cams,
                           std::span<const std::int64_t> g_cams, bool higher_is_better = true) {
    if (sim.empty()) {
        throw DimensionError("evaluate: score matrix must be non-empty");
    }
    const std::size_t nq = sim.rows(), ng = sim.cols();
    if (q_ids.size() != nq || q_cams.size() != nq || g_ids.size() != ng || g_cams.size() != ng) {
        throw DimensionError("evaluate: label vectors disagree with score matrix shape");
    }

    std::vector<double> cmc_counts(ng, 0.0);
    double ap_sum = 0.0, inp_sum = 0.0;
    std::size_t evaluated = 0;

    for (std::size_t qi = 0; qi < nq; ++qi) {
        const auto order = detail::rank_row(sim.row(qi), ng, higher_is_better);

        // Walk the ranking, dropping same-identity same-camera gallery items.
        std::size_t kept = 0, num_rel = 0, hits = 0;
        double precision_sum = 0.0;
        std::size_t first_rel = 0, last_rel = 0; // 1-based ranks in the filtered list
        for (std::size_t j : order) {
            const bool same_id = g_ids[j] == q_ids[qi];
            if (same_id && g_cams[j] == q_cams[qi]) continue;
            ++kept;
            if (same_id) {
                ++hits;
                precision_sum += static_cast<double>(hits) / static_cast<double>(kept);
                if (hits == 1) first_rel = kept;
                last_rel = kept;
                ++num_rel;
            }
        }
        if (num_rel == 0) continue; // no valid relevant item: query skipped

        ++evaluated;
        ap_sum += precision_sum / static_cast<double>(num_rel);
        inp_sum += static_cast<double>(num_rel) / static_cast<double>(last_rel);
        for (std::size_t k = first_rel - 1; k < ng; ++k) cmc_counts[k] += 1.0;
    }

    if (evaluated == 0) {
        throw EvaluationError("evaluate: every query was skipped (no valid relevant items)");
    }

    EvalReport report;
    report.cmc.resize(ng);
    for (std::size_t k = 0; k < ng; ++k) {
        report.cmc[k] = cmc_counts[k] / static_cast<double>(evaluated);
    }
    auto cmc_at = [&](std::size_t k) { return report.cmc[std::min(k, ng) - 1]; };
    report.rank1 = cmc_at(1);
    report.rank5 = cmc_at(5);
    report.rank10 = cmc_at(10);
    report.rank20 = cmc_at(20);
    report.map = ap_sum / static_cast<double>(evaluated);
    report.minp = inp_sum / static_cast<double>(evaluated);
    report.num_queries_evaluated = evaluated;
    return report;
}

inline EvalReport evaluate(const Matrix& sim, const FeatureSet& query, const FeatureSet& gallery,
                           bool higher_is_better = true) {
    return evaluate(sim, query.person_ids, gallery.person_ids, query.camera_ids,
                    gallery.camera_ids, higher_is_better);
}

/// Structured JSON document with stable key order.
inline std::string to_json(const EvalReport& r, int indent = -1) {
    nlohmann::ordered_json j;
    j["rank1"] = r.rank1;
    j["rank5"] = r.rank5;
    j["rank10"] = r.rank10;
    j["rank20"] = r.rank20;
    j["mAP"] = r.map;
    j["mINP"] = r.minp;
    j["num_queries_evaluated"] = r.num_queries_evaluated;
    j["cmc"] = r.cmc;
    return j.dump(indent);
}

/// Flat key/value text document (tab-separated, one metric per line).
inline std::string to_kv_text(const EvalReport& r) {
    char buf[64];
    std::string out;
    auto line = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%s\t%.6f\n", key, v);
        out += buf;
    };
    line("rank1", r.rank1);
    line("rank5", r.rank5);
    line("rank10", r.rank10);
    line("rank20", r.rank20);
    line("mAP", r.map);
    line("mINP", r.minp);
    out += "num_queries_evaluated\t" + std::to_string(r.num_queries_evaluated) + "\n";
    out += "cmc\t";
    for (std::size_t k = 0; k < r.cmc.size(); ++k) {
        std::snprintf(buf, sizeof(buf), k + 1 == r.cmc.size() ? "%.6f" : "%.6f,", r.cmc[k]);
        out += buf;
    }
    out += "\n";
    return out;
}

} // namespace crossrank
