#pragma once

// =============================================================================
// Reference re-rankers used for comparison against HHCR: plain cross-modal
// cosine retrieval, k-reciprocal re-ranking (Jaccard distance over mutual
// neighbor sets) and Expanded Cross Neighborhood (ECN) distance. Both
// neighborhood methods operate over the joint query+gallery set.
// =============================================================================

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "crossrank/errors.hpp"
#include "crossrank/feature_set.hpp"
#include "crossrank/matrix.hpp"

namespace crossrank {

struct KReciprocalParams {
    std::size_t k1 = 20;
    std::size_t k2 = 6;
    double lambda = 0.3;
};

struct EcnParams {
    std::size_t t = 3; // immediate neighbor list length
    std::size_t q = 8; // expansion length per immediate neighbor
};

/// Plain cross-modal cosine similarity (the no-re-ranking baseline).
inline Matrix cosine_rank(const FeatureSet& xv, const FeatureSet& xr) {
    xv.validate();
    xr.validate();
    if (xv.dim != xr.dim) {
        throw DimensionError("cosine_rank: feature sets must share the embedding dimension");
    }
    return cosine_similarity(xv.to_matrix(), xr.to_matrix());
}

namespace detail {

/// Euclidean distances between L2-normalized rows of the stacked set
/// [q; g], with an exact-zero diagonal.
inline Matrix joint_euclidean(const FeatureSet& q, const FeatureSet& g) {
    const std::size_t m = q.count + g.count, d = q.dim;
    Matrix joint(m, d);
    for (std::size_t i = 0; i < q.count * d; ++i) {
        joint.data()[i] = static_cast<double>(q.embeddings[i]);
    }
    for (std::size_t i = 0; i < g.count * d; ++i) {
        joint.data()[q.count * d + i] = static_cast<double>(g.embeddings[i]);
    }
    const Matrix cos = cosine_similarity(joint, joint);
    Matrix dist(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            dist(i, j) = i == j ? 0.0 : std::sqrt(std::max(0.0, 2.0 - 2.0 * cos(i, j)));
        }
    }
    return dist;
}

/// 1 - cosine over the stacked set [q; g], exact-zero diagonal.
inline Matrix joint_cosine_distance(const FeatureSet& q, const FeatureSet& g) {
    const std::size_t m = q.count + g.count, d = q.dim;
    Matrix joint(m, d);
    for (std::size_t i = 0; i < q.count * d; ++i) {
        joint.data()[i] = static_cast<double>(q.embeddings[i]);
    }
    for (std::size_t i = 0; i < g.count * d; ++i) {
        joint.data()[q.count * d + i] = static_cast<double>(g.embeddings[i]);
    }
    const Matrix cos = cosine_similarity(joint, joint);
    Matrix dist(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            dist(i, j) = i == j ? 0.0 : 1.0 - cos(i, j);
        }
    }
    return dist;
}

/// Ascending-distance order of row i (self included, ranked first by its
/// zero distance), ties toward the lower index.
inline std::vector<std::size_t> distance_order(const Matrix& dist, std::size_t i) {
    std::vector<std::size_t> idx(dist.cols());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const double* row = dist.row(i);
    std::sort(idx.begin(), idx.end(), [row](std::size_t a, std::size_t b) {
        if (row[a] != row[b]) return row[a] < row[b];
        return a < b;
    });
    return idx;
}

/// Mutual top-k neighbor set of item i: members of i's forward list of
/// length k+1 (self included) whose own forward lists contain i.
inline std::vector<std::size_t> mutual_neighbors(const std::vector<std::vector<std::size_t>>& rank,
                                                 std::size_t i, std::size_t k) {
    std::vector<std::size_t> out;
    for (std::size_t pos = 0; pos <= k; ++pos) {
        const std::size_t j = rank[i][pos];
        for (std::size_t back = 0; back <= k; ++back) {
            if (rank[j][back] == i) {
                out.push_back(j);
                break;
            }
        }
    }
    return out;
}

} // namespace detail

/// k-reciprocal re-ranking over the joint query+gallery set: mutual top-k1
/// neighbor sets, expansion by half-size mutual sets that overlap at least
/// 2/3 with the base set, Gaussian-weighted membership vectors, local query
/// expansion over the top-k2 ranks, Jaccard distance, and fusion
/// (1-lambda)*dJ + lambda*d_original. Output is a distance (smaller=better).
inline Matrix kreciprocal_rerank(const FeatureSet& q, const FeatureSet& g,
                                 const KReciprocalParams& p) {
    q.validate();
    g.validate();
    if (q.dim != g.dim) {
        throw DimensionError("kreciprocal: feature sets must share the embedding dimension");
    }
    const std::size_t nq = q.count, ng = g.count, m = nq + ng;
    if (p.k1 < 1 || p.k2 < 1 || p.k2 > p.k1) {
        throw ParameterError("kreciprocal: constraint violated: 1 <= k2 <= k1");
    }
    if (p.k1 >= m) {
        throw ParameterError("kreciprocal: constraint violated: k1 < nq+ng");
    }
    if (p.lambda < 0.0 || p.lambda > 1.0) {
        throw ParameterError("kreciprocal: constraint violated: 0 <= lambda <= 1");
    }

    const Matrix dist = detail::joint_euclidean(q, g);
    std::vector<std::vector<std::size_t>> rank(m);
    for (std::size_t i = 0; i < m; ++i) rank[i] = detail::distance_order(dist, i);

    const std::size_t half = p.k1 / 2;
    Matrix v(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::size_t> base = detail::mutual_neighbors(rank, i, p.k1);
        std::vector<char> member(m, 0);
        for (std::size_t j : base) member[j] = 1;

        // Expand by candidates whose half-size mutual set mostly overlaps the base set.
        std::vector<std::size_t> expanded = base;
        for (std::size_t y : base) {
            const auto cand = detail::mutual_neighbors(rank, y, half);
            std::size_t overlap = 0;
            for (std::size_t z : cand) overlap += member[z] ? 1 : 0;
            if (3 * overlap >= 2 * cand.size()) {
                expanded.insert(expanded.end(), cand.begin(), cand.end());
            }
        }
        std::sort(expanded.begin(), expanded.end());
        expanded.erase(std::unique(expanded.begin(), expanded.end()), expanded.end());

        double total = 0.0;
        for (std::size_t j : expanded) total += std::exp(-dist(i, j));
        for (std::size_t j : expanded) v(i, j) = std::exp(-dist(i, j)) / total;
    }

    if (p.k2 > 1) {
        Matrix vq(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            double* dst = vq.row(i);
            for (std::size_t pos = 0; pos < p.k2; ++pos) {
                const double* src = v.row(rank[i][pos]);
                for (std::size_t j = 0; j < m; ++j) dst[j] += src[j];
            }
            const double inv = 1.0 / static_cast<double>(p.k2);
            for (std::size_t j = 0; j < m; ++j) dst[j] *= inv;
        }
        v = std::move(vq);
    }

    Matrix out(nq, ng);
    for (std::size_t i = 0; i < nq; ++i) {
        const double* vi = v.row(i);
        for (std::size_t j = 0; j < ng; ++j) {
            const double* vg = v.row(nq + j);
            double mins = 0.0, maxs = 0.0;
            for (std::size_t t = 0; t < m; ++t) {
                mins += std::min(vi[t], vg[t]);
                maxs += std::max(vi[t], vg[t]);
            }
            const double jaccard = 1.0 - mins / maxs;
            out(i, j) = (1.0 - p.lambda) * jaccard + p.lambda * dist(i, nq + j);
        }
    }
    return out;
}

/// Expanded Cross Neighborhood distance over the joint set: the expanded list
/// of an item is its top-t neighbors plus the top-q neighbors of each of
/// those (duplicates kept). ECN(p, g) averages the original distances from g
/// to p's expanded list and from p to g's. Output is a distance.
inline Matrix ecn_rerank(const FeatureSet& q, const FeatureSet& g, const EcnParams& p) {
    q.validate();
    g.validate();
    if (q.dim != g.dim) {
        throw DimensionError("ecn: feature sets must share the embedding dimension");
    }
    const std::size_t nq = q.count, ng = g.count, m = nq + ng;
    if (p.t < 1 || p.t > m - 1) {
        throw ParameterError("ecn: constraint violated: 1 <= t <= nq+ng-1");
    }
    if (p.q < 1 || p.q > m - 1) {
        throw ParameterError("ecn: constraint violated: 1 <= q <= nq+ng-1");
    }

    const Matrix dist = detail::joint_cosine_distance(q, g);

    // Per item: ascending-distance order over the other items (self excluded).
    std::vector<std::vector<std::size_t>> nn(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto order = detail::distance_order(dist, i);
        nn[i].reserve(m - 1);
        for (std::size_t j : order) {
            if (j != i) nn[i].push_back(j);
        }
    }

    const std::size_t len = p.t + p.t * p.q;
    std::vector<std::vector<std::size_t>> expanded(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto& list = expanded[i];
        list.reserve(len);
        for (std::size_t a = 0; a < p.t; ++a) list.push_back(nn[i][a]);
        for (std::size_t a = 0; a < p.t; ++a) {
            const std::size_t y = nn[i][a];
            for (std::size_t b = 0; b < p.q; ++b) list.push_back(nn[y][b]);
        }
    }

    Matrix out(nq, ng);
    const double inv = 1.0 / static_cast<double>(2 * len);
    for (std::size_t i = 0; i < nq; ++i) {
        for (std::size_t j = 0; j < ng; ++j) {
            const std::size_t gj = nq + j;
            double acc = 0.0;
            for (std::size_t y : expanded[i]) acc += dist(gj, y);
            for (std::size_t y : expanded[gj]) acc += dist(i, y);
            out(i, j) = acc * inv;
        }
    }
    return out;
}

} // namespace crossrank
