#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "crossrank/errors.hpp"
#include "crossrank/matrix.hpp"

namespace crossrank {

enum class Modality { visible, infrared };

inline const char* to_string(Modality m) {
    return m == Modality::visible ? "visible" : "infrared";
}

inline Modality modality_from_string(std::string_view s) {
    if (s == "visible") return Modality::visible;
    if (s == "infrared") return Modality::infrared;
    throw DomainError("unknown modality: " + std::string(s));
}

/// A labeled embedding matrix for one modality. Embeddings are stored as
/// 32-bit floats (the on-disk representation); computations widen to 64-bit.
struct FeatureSet {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::vector<float> embeddings; // row-major count × dim
    std::vector<std::int64_t> person_ids;
    std::vector<std::int64_t> camera_ids;
    Modality modality = Modality::visible;

    void validate() const {
        if (count < 1 || dim < 1) {
            throw DimensionError("feature set must have count >= 1 and dim >= 1");
        }
        if (embeddings.size() != count * dim) {
            throw DimensionError("embedding length does not equal count * dim");
        }
        if (person_ids.size() != count || camera_ids.size() != count) {
            throw DimensionError("label vectors must have length count");
        }
        for (float v : embeddings) {
            if (!std::isfinite(v)) {
                throw DomainError("embeddings must be finite");
            }
        }
    }

    /// Widens the float32 embeddings into a 64-bit Matrix.
    Matrix to_matrix() const {
        Matrix m(count, dim);
        for (std::size_t i = 0; i < count * dim; ++i) {
            m.data()[i] = static_cast<double>(embeddings[i]);
        }
        return m;
    }
};

} // namespace crossrank
