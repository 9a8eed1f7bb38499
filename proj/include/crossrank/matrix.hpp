#pragma once

// =============================================================================
// Dense row-major matrix and the kernel operations shared by every re-ranker:
// cosine similarity, row L2 normalization, per-row top-k selection (binary and
// value-preserving), row-stochastic normalization and matrix products.
//
// Storage is 64-bit; all reductions run in 64-bit with a fixed per-row
// evaluation order, so identical inputs give bit-identical outputs regardless
// of thread count.
// =============================================================================

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "crossrank/errors.hpp"
#include "crossrank/parallel.hpp"

namespace crossrank {

class Matrix {
public:
    Matrix() = default;

    /// Zero-initialized rows × cols matrix.
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    /// Takes ownership of row-major data; rejects size mismatch and non-finite entries.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw DimensionError("matrix data length does not equal rows * cols");
        }
        check_finite();
    }

    /// Convenience constructor for literals; all rows must have equal length.
    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) {
                throw DimensionError("ragged initializer: rows have unequal lengths");
            }
            data_.insert(data_.end(), r.begin(), r.end());
        }
        check_finite();
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    const double* row(std::size_t i) const { return data_.data() + i * cols_; }
    double* row(std::size_t i) { return data_.data() + i * cols_; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    /// Bitwise equality, used by determinism checks.
    bool bit_equal(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ &&
               (data_.empty() ||
                std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0);
    }

private:
    void check_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) {
                throw DomainError("matrix entries must be finite");
            }
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

namespace detail {

inline void require_nonempty(const Matrix& m, const char* op) {
    if (m.empty()) {
        throw DimensionError(std::string(op) + ": matrix must be non-empty");
    }
}

/// Indices of the k largest entries of a row, ties broken toward the lower
/// column index, written in selection order to idx (resized to k).
inline void topk_row(const double* row, std::size_t cols, std::size_t k,
                     std::vector<std::size_t>& idx) {
    idx.resize(cols);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [row](std::size_t a, std::size_t b) {
                          if (row[a] != row[b]) return row[a] > row[b];
                          return a < b;
                      });
    idx.resize(k);
}

/// out(i, :) = dot(a(i, :), b(j, :)) for all j; both operands row-major with
/// equal column counts. Four independent accumulators per step keep the
/// per-element reduction order identical to a plain ascending-k loop.
inline void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out) {
    const std::size_t n = a.rows(), m = b.rows(), d = a.cols();
    parallel_rows(n, [&](std::size_t i) {
        const double* ai = a.row(i);
        double* oi = out.row(i);
        std::size_t j = 0;
        for (; j + 4 <= m; j += 4) {
            const double* b0 = b.row(j);
            const double* b1 = b.row(j + 1);
            const double* b2 = b.row(j + 2);
            const double* b3 = b.row(j + 3);
            double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double av = ai[k];
                s0 += av * b0[k];
                s1 += av * b1[k];
                s2 += av * b2[k];
                s3 += av * b3[k];
            }
            oi[j] = s0;
            oi[j + 1] = s1;
            oi[j + 2] = s2;
            oi[j + 3] = s3;
        }
        for (; j < m; ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += ai[k] * bj[k];
            oi[j] = s;
        }
    });
}

} // namespace detail

inline Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
    }
    return out;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("matrix addition requires equal shapes");
    }
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.data().size(); ++i) {
        out.data()[i] = a.data()[i] + b.data()[i];
    }
    return out;
}

inline Matrix elementwise_multiply(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("elementwise multiply requires equal shapes");
    }
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < out.data().size(); ++i) {
        out.data()[i] = a.data()[i] * b.data()[i];
    }
    return out;
}

/// Scales every row to unit Euclidean norm. Rows with norm below 1e-12 are
/// copied unchanged; their count is reported through zero_row_count when a
/// destination is supplied.
inline Matrix l2_normalize_rows(const Matrix& m, std::size_t* zero_row_count = nullptr) {
    detail::require_nonempty(m, "l2_normalize_rows");
    Matrix out(m.rows(), m.cols());
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* src = m.row(i);
        double* dst = out.row(i);
        double sum_sq = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) sum_sq += src[j] * src[j];
        const double norm = std::sqrt(sum_sq);
        if (norm < 1e-12) {
            ++zeros;
            std::copy(src, src + m.cols(), dst);
        } else {
            const double inv = 1.0 / norm;
            for (std::size_t j = 0; j < m.cols(); ++j) dst[j] = src[j] * inv;
        }
    }
    if (zero_row_count) *zero_row_count = zeros;
    return out;
}

/// Pairwise cosine similarity between the rows of a and the rows of b.
inline Matrix cosine_similarity(const Matrix& a, const Matrix& b) {
    detail::require_nonempty(a, "cosine_similarity");
    detail::require_nonempty(b, "cosine_similarity");
    if (a.cols() != b.cols()) {
        throw DimensionError("cosine_similarity: operands must have the same column count");
    }
    const Matrix an = l2_normalize_rows(a);
    const Matrix bn = l2_normalize_rows(b);
    Matrix out(a.rows(), b.rows());
    detail::gemm_nt(an, bn, out);
    return out;
}

/// Per row, 1 at the positions of the k largest entries (ties toward the
/// lower column index) and 0 elsewhere. Every row sums to exactly k.
inline Matrix topk_binary(const Matrix& s, std::size_t k) {
    detail::require_nonempty(s, "topk_binary");
    if (k < 1 || k > s.cols()) {
        throw ParameterError("topk_binary: k must satisfy 1 <= k <= cols");
    }
    Matrix out(s.rows(), s.cols());
    parallel_rows(s.rows(), [&](std::size_t i) {
        std::vector<std::size_t> idx;
        detail::topk_row(s.row(i), s.cols(), k, idx);
        double* dst = out.row(i);
        for (std::size_t j : idx) dst[j] = 1.0;
    });
    return out;
}

/// Per row, the k largest entries keep their values (same tie rule as
/// topk_binary), the rest become 0.
inline Matrix topk_values(const Matrix& s, std::size_t k) {
    detail::require_nonempty(s, "topk_values");
    if (k < 1 || k > s.cols()) {
        throw ParameterError("topk_values: k must satisfy 1 <= k <= cols");
    }
    Matrix out(s.rows(), s.cols());
    parallel_rows(s.rows(), [&](std::size_t i) {
        std::vector<std::size_t> idx;
        const double* src = s.row(i);
        detail::topk_row(src, s.cols(), k, idx);
        double* dst = out.row(i);
        for (std::size_t j : idx) dst[j] = src[j];
    });
    return out;
}

/// Divides each row by its sum, producing a row-stochastic matrix. Requires
/// non-negative input. An all-zero row falls back to the one-hot self row
/// when the matrix is square, otherwise to the uniform row 1/cols.
inline Matrix row_normalize(const Matrix& m) {
    detail::require_nonempty(m, "row_normalize");
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* src = m.row(i);
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (src[j] < 0.0) {
                throw DomainError("row_normalize: entries must be non-negative");
            }
            sum += src[j];
        }
        double* dst = out.row(i);
        if (sum == 0.0) {
            if (m.rows() == m.cols()) {
                dst[i] = 1.0;
            } else {
                const double u = 1.0 / static_cast<double>(m.cols());
                for (std::size_t j = 0; j < m.cols(); ++j) dst[j] = u;
            }
        } else {
            const double inv = 1.0 / sum;
            for (std::size_t j = 0; j < m.cols(); ++j) dst[j] = src[j] * inv;
        }
    }
    return out;
}

/// Standard matrix product. Zero entries of a are skipped, which leaves the
/// result bit-identical to the dense accumulation while making products with
/// top-k-sparse left operands cheap.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    detail::require_nonempty(a, "matmul");
    detail::require_nonempty(b, "matmul");
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions do not agree");
    }
    Matrix out(a.rows(), b.cols());
    const std::size_t p = a.cols(), m = b.cols();
    parallel_rows(a.rows(), [&](std::size_t i) {
        const double* ai = a.row(i);
        double* oi = out.row(i);
        for (std::size_t k = 0; k < p; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = b.row(k);
            for (std::size_t j = 0; j < m; ++j) oi[j] += aik * bk[j];
        }
    });
    return out;
}

} // namespace crossrank
