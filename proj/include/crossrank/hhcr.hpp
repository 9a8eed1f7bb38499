#pragma once

// =============================================================================
// HHCR: two-stage consistency re-ranking for cross-modal retrieval.
//
// Stage 1 (heterogeneous): build the joint cosine similarity matrix over the
// concatenated visible+infrared set, form a mutual-neighbor adjacency from
// per-row top-k1/k4 selections, expand each item's candidate row (top-k2/k5
// values) over its local neighborhood, and aggregate one random-walk hop of
// the adjacency over the expanded rows. The aggregated matrix splits back
// into visible and infrared ranking descriptors.
//
// Stage 2 (homogeneous): inside each intra-modal block, build a row-stochastic
// smoothing filter from masked top-k value rows expanded over their own
// neighborhoods, and apply it to both the stage-1 descriptors and the raw
// embeddings.
//
// The final score fuses row-wise cosine similarity of the two filtered
// descriptor families with weight lambda.
// =============================================================================

#include <cstddef>
#include <string>

#include "crossrank/errors.hpp"
#include "crossrank/feature_set.hpp"
#include "crossrank/matrix.hpp"

namespace crossrank {

/// Neighborhood sizes and fusion weight for the two-stage pipeline.
/// k1/k4 size the joint-set adjacency (visible/infrared rows), k2/k5 the
/// candidate and intra-modal neighborhoods, k3/k6 the intra-modal value
/// retention. rtf_enabled symmetrizes the adjacency with its transpose;
/// lqe_enabled toggles the stage-1 local query expansion.
///
/// The defaults suit galleries with a handful of samples per identity, such
/// as the bundled synthetic generator; pick k1/k4 near the expected number of
/// same-identity items in the joint set and k2/k5/k3/k6 near the per-modality
/// group size.
struct HhcrParams {
    std::size_t k1 = 8;
    std::size_t k2 = 4;
    std::size_t k3 = 4;
    std::size_t k4 = 8;
    std::size_t k5 = 4;
    std::size_t k6 = 4;
    double lambda = 0.3;
    bool rtf_enabled = true;
    bool lqe_enabled = true;
};

namespace detail {

inline void require_param(bool ok, const std::string& what) {
    if (!ok) throw ParameterError("hhcr: constraint violated: " + what);
}

/// Bounds used by the adjacency / candidate stages, which select over full
/// joint rows and stay legal for degenerate settings like k1 = k2 = 1.
inline void validate_stage1_bounds(const HhcrParams& p, std::size_t n) {
    require_param(p.k1 >= 1 && p.k1 <= n, "1 <= k1 <= nv+nr");
    require_param(p.k4 >= 1 && p.k4 <= n, "1 <= k4 <= nv+nr");
    require_param(p.k2 >= 1 && p.k2 <= n, "1 <= k2 <= nv+nr");
    require_param(p.k5 >= 1 && p.k5 <= n, "1 <= k5 <= nv+nr");
}

} // namespace detail

/// Validates the full parameter set against the modality sizes; this is the
/// contract enforced by the end-to-end pipeline. Throws ParameterError naming
/// the violated constraint.
inline void validate_params(const HhcrParams& p, std::size_t nv, std::size_t nr) {
    const std::size_t n = nv + nr;
    detail::require_param(p.k1 >= 1 && p.k1 <= n, "1 <= k1 <= nv+nr");
    detail::require_param(p.k4 >= 1 && p.k4 <= n, "1 <= k4 <= nv+nr");
    detail::require_param(p.k2 >= 1 && p.k2 <= nv, "1 <= k2 <= nv");
    detail::require_param(p.k3 >= 1 && p.k3 <= nv, "1 <= k3 <= nv");
    detail::require_param(p.k5 >= 1 && p.k5 <= nr, "1 <= k5 <= nr");
    detail::require_param(p.k6 >= 1 && p.k6 <= nr, "1 <= k6 <= nr");
    detail::require_param(p.k1 > p.k2, "k1 > k2");
    detail::require_param(p.k4 > p.k5, "k4 > k5");
    detail::require_param(p.lambda >= 0.0 && p.lambda <= 1.0, "0 <= lambda <= 1");
}

/// Joint similarity over the concatenated set; visible items occupy rows and
/// columns [0, nv), infrared the remainder.
struct JointSimilarity {
    Matrix s;
    std::size_t nv = 0;

    std::size_t total() const { return s.rows(); }
    std::size_t nr() const { return s.rows() - nv; }

    void validate(double tol = 1e-6) const {
        if (s.empty() || s.rows() != s.cols()) {
            throw DimensionError("joint similarity must be square and non-empty");
        }
        if (nv < 1 || nv >= s.rows()) {
            throw DimensionError("joint similarity requires 1 <= nv < total");
        }
        for (std::size_t i = 0; i < s.rows(); ++i) {
            if (std::abs(s(i, i) - 1.0) > tol) {
                throw DomainError("joint similarity diagonal must be 1");
            }
            for (std::size_t j = i + 1; j < s.cols(); ++j) {
                if (std::abs(s(i, j) - s(j, i)) > tol) {
                    throw DomainError("joint similarity must be symmetric");
                }
            }
        }
    }
};

/// Stage-1 products: per-modality ranking descriptors over the joint set and
/// the adjacency that produced them.
struct HeteroOutput {
    Matrix fv_rank; // nv × N
    Matrix fr_rank; // nr × N
    Matrix w;       // N × N adjacency actually used
};

/// Stage-2 products: descriptors and embeddings after intra-modal smoothing.
struct FilteredFeatures {
    Matrix fv_rank; // nv × N
    Matrix fr_rank; // nr × N
    Matrix fv;      // nv × d
    Matrix fr;      // nr × d
};

/// Cosine similarity of the row-concatenation [Xv; Xr] against itself.
inline JointSimilarity build_joint_similarity(const FeatureSet& xv, const FeatureSet& xr) {
    xv.validate();
    xr.validate();
    if (xv.dim != xr.dim) {
        throw DimensionError("joint similarity: feature sets must share the embedding dimension");
    }
    const std::size_t n = xv.count + xr.count, d = xv.dim;
    Matrix joint(n, d);
    for (std::size_t i = 0; i < xv.count * d; ++i) {
        joint.data()[i] = static_cast<double>(xv.embeddings[i]);
    }
    for (std::size_t i = 0; i < xr.count * d; ++i) {
        joint.data()[xv.count * d + i] = static_cast<double>(xr.embeddings[i]);
    }
    return JointSimilarity{cosine_similarity(joint, joint), xv.count};
}

namespace detail {

/// Row-wise top-k over the full joint rows with per-modality k: the first nv
/// rows use k_vis, the rest k_ir. binary selects indicator vs value retention.
inline Matrix split_topk(const Matrix& s, std::size_t nv, std::size_t k_vis, std::size_t k_ir,
                         bool binary) {
    Matrix out(s.rows(), s.cols());
    parallel_rows(s.rows(), [&](std::size_t i) {
        const std::size_t k = i < nv ? k_vis : k_ir;
        std::vector<std::size_t> idx;
        const double* src = s.row(i);
        topk_row(src, s.cols(), k, idx);
        double* dst = out.row(i);
        for (std::size_t j : idx) dst[j] = binary ? 1.0 : src[j];
    });
    return out;
}

inline Matrix block(const Matrix& s, std::size_t r0, std::size_t c0, std::size_t rows,
                    std::size_t cols) {
    Matrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* src = s.row(r0 + i) + c0;
        std::copy(src, src + cols, out.row(i));
    }
    return out;
}

} // namespace detail

/// Mutual-neighbor adjacency over the joint set: per-row top-k1 (visible rows)
/// / top-k4 (infrared rows) indicators B, symmetrized to B + Bᵀ when
/// rtf_enabled (mutual neighbors keep additive weight 2), else B alone.
inline Matrix heterogeneous_adjacency(const JointSimilarity& js, const HhcrParams& p) {
    detail::require_param(p.k1 >= 1 && p.k1 <= js.total(), "1 <= k1 <= nv+nr");
    detail::require_param(p.k4 >= 1 && p.k4 <= js.total(), "1 <= k4 <= nv+nr");
    Matrix b = detail::split_topk(js.s, js.nv, p.k1, p.k4, /*binary=*/true);
    if (!p.rtf_enabled) return b;
    return b + transpose(b);
}

/// Candidate rows: per-row top-k2 / top-k5 of the full joint rows with value
/// retention; everything outside the neighborhood is zeroed.
inline Matrix candidate_features(const JointSimilarity& js, const HhcrParams& p) {
    detail::require_param(p.k2 >= 1 && p.k2 <= js.total(), "1 <= k2 <= nv+nr");
    detail::require_param(p.k5 >= 1 && p.k5 <= js.total(), "1 <= k5 <= nv+nr");
    return detail::split_topk(js.s, js.nv, p.k2, p.k5, /*binary=*/false);
}

/// Local query expansion: each output row is the mean of the rows of m over
/// that row's neighbor set, i.e. row_normalize(neighbors) × m.
inline Matrix lqe(const Matrix& m, const Matrix& neighbors) {
    if (neighbors.rows() != neighbors.cols() || neighbors.rows() != m.rows()) {
        throw DimensionError("lqe: neighbors must be n×n matching m's row count");
    }
    return matmul(row_normalize(neighbors), m);
}

/// Stage 1: aggregate the locally-expanded candidate rows over one
/// random-walk-normalized hop of the adjacency, then split by modality.
inline HeteroOutput heterogeneous_rerank(const JointSimilarity& js, const HhcrParams& p) {
    detail::validate_stage1_bounds(p, js.total());
    Matrix w = heterogeneous_adjacency(js, p);
    const Matrix c = candidate_features(js, p);

    Matrix h0;
    if (p.lqe_enabled) {
        const Matrix nbrs = detail::split_topk(c, js.nv, p.k2, p.k5, /*binary=*/true);
        h0 = lqe(c, nbrs);
    } else {
        h0 = c;
    }
    const Matrix h = matmul(row_normalize(w), h0);

    HeteroOutput out;
    out.fv_rank = detail::block(h, 0, 0, js.nv, js.total());
    out.fr_rank = detail::block(h, js.nv, 0, js.nr(), js.total());
    out.w = std::move(w);
    return out;
}

/// Intra-modal smoothing operator: top-k_val value rows masked by the
/// top-k_bin neighborhoods, expanded over those neighborhoods and made
/// row-stochastic.
inline Matrix homogeneous_filter(const Matrix& block, std::size_t k_bin, std::size_t k_val) {
    if (block.empty() || block.rows() != block.cols()) {
        throw DimensionError("homogeneous_filter: block must be square and non-empty");
    }
    if (k_bin < 1 || k_bin > block.rows() || k_val < 1 || k_val > block.rows()) {
        throw ParameterError("homogeneous_filter: k out of range");
    }
    const Matrix nbrs = topk_binary(block, k_bin);
    const Matrix masked = elementwise_multiply(topk_values(block, k_val), nbrs);
    return row_normalize(lqe(masked, nbrs));
}

/// Stage 2: build the visible filter from the F_vv block with (k2, k3) and
/// the infrared filter from F_rr with (k5, k6), then smooth both the stage-1
/// descriptors and the raw embeddings.
inline FilteredFeatures apply_homogeneous_filters(const HeteroOutput& h, const JointSimilarity& js,
                                                  const FeatureSet& xv, const FeatureSet& xr,
                                                  const HhcrParams& p) {
    detail::require_param(p.k2 >= 1 && p.k2 <= js.nv, "1 <= k2 <= nv");
    detail::require_param(p.k3 >= 1 && p.k3 <= js.nv, "1 <= k3 <= nv");
    detail::require_param(p.k5 >= 1 && p.k5 <= js.nr(), "1 <= k5 <= nr");
    detail::require_param(p.k6 >= 1 && p.k6 <= js.nr(), "1 <= k6 <= nr");
    const std::size_t nv = js.nv, nr = js.nr(), n = js.total();
    if (h.fv_rank.rows() != nv || h.fv_rank.cols() != n || h.fr_rank.rows() != nr ||
        h.fr_rank.cols() != n || xv.count != nv || xr.count != nr) {
        throw DimensionError("apply_homogeneous_filters: shapes disagree with joint similarity");
    }
    const Matrix phi_v = homogeneous_filter(detail::block(js.s, 0, 0, nv, nv), p.k2, p.k3);
    const Matrix phi_r = homogeneous_filter(detail::block(js.s, nv, nv, nr, nr), p.k5, p.k6);

    FilteredFeatures out;
    out.fv_rank = matmul(phi_v, h.fv_rank);
    out.fr_rank = matmul(phi_r, h.fr_rank);
    out.fv = matmul(phi_v, xv.to_matrix());
    out.fr = matmul(phi_r, xr.to_matrix());
    return out;
}

/// Full pipeline. Returns the nv × nr fused score matrix
///   (1-lambda) * cos(filtered visible descriptors, filtered infrared descriptors)
///   +  lambda  * cos(filtered visible embeddings,  filtered infrared embeddings)
/// with every entry in [-1, 1] up to rounding.
inline Matrix hhcr_final(const FeatureSet& xv, const FeatureSet& xr, const HhcrParams& p) {
    const JointSimilarity js = build_joint_similarity(xv, xr);
    validate_params(p, js.nv, js.nr());
    const HeteroOutput hetero = heterogeneous_rerank(js, p);
    const FilteredFeatures f = apply_homogeneous_filters(hetero, js, xv, xr, p);

    const Matrix rank_term = cosine_similarity(f.fv_rank, f.fr_rank);
    const Matrix feat_term = cosine_similarity(f.fv, f.fr);

    Matrix out(js.nv, js.nr());
    const double lam = p.lambda;
    for (std::size_t i = 0; i < out.data().size(); ++i) {
        out.data()[i] = (1.0 - lam) * rank_term.data()[i] + lam * feat_term.data()[i];
    }
    return out;
}

} // namespace crossrank
