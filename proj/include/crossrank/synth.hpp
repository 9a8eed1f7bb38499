#pragma once

// =============================================================================
// Deterministic two-modality synthetic dataset generator.
//
// Each identity gets a unit-norm prototype direction. Each modality gets a
// fixed offset vector with i.i.d. N(0, modality_offset_sigma^2) coordinates,
// giving the two modalities a pronounced systematic gap of expected norm
// modality_offset_sigma * sqrt(dim). Each sample adds isotropic Gaussian
// noise whose expected norm is noise_sigma (per-coordinate deviation
// noise_sigma / sqrt(dim)), so sample dispersion around prototype+offset is
// directly comparable to the unit prototype at any dimension.
//
// Randomness comes from SplitMix64 streams keyed by (seed, purpose, identity,
// modality), so the output is a pure function of the spec: independent of
// generation order and of the platform's library distributions. Gaussians are
// produced by a Box-Muller transform of the raw uniform draws.
// =============================================================================

#include <cstdint>
#include <utility>
#include <vector>

#include "crossrank/errors.hpp"
#include "crossrank/feature_set.hpp"

namespace crossrank {

/// SplitMix64: 64-bit state advanced by the golden-gamma increment and mixed
/// through the Stafford finalizer.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller on two uniform draws.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1)); // 1-u1 in (0,1]
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from (seed, purpose, a, b).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t purpose, std::uint64_t a,
                                 std::uint64_t b) {
    std::uint64_t h = mix64(seed ^ 0x243F6A8885A308D3ULL);
    h = mix64(h ^ purpose);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    return h;
}

constexpr std::uint64_t kStreamPrototype = 1;
constexpr std::uint64_t kStreamModalityOffset = 2;
constexpr std::uint64_t kStreamSampleNoise = 3;

} // namespace detail

struct SynthSpec {
    std::size_t num_identities = 50;
    std::size_t per_identity_per_modality = 4;
    std::size_t dim = 64;
    double noise_sigma = 0.4;
    double modality_offset_sigma = 0.3;
    std::uint64_t seed = 42;

    void validate() const {
        if (num_identities < 1 || per_identity_per_modality < 1) {
            throw ParameterError("synth spec counts must be >= 1");
        }
        if (dim < 2) {
            throw ParameterError("synth spec dim must be >= 2");
        }
        if (!(noise_sigma >= 0.0) || !(modality_offset_sigma >= 0.0)) {
            throw ParameterError("synth spec sigmas must be non-negative");
        }
    }
};

/// Generates a (visible, infrared) pair of feature sets: one unit-norm
/// prototype per identity, a fixed per-modality offset vector simulating the
/// modality gap, and per-sample Gaussian noise. Visible samples carry camera
/// id 1, infrared camera id 2, so cross-modal evaluation never excludes a
/// whole gallery.
inline std::pair<FeatureSet, FeatureSet> synth_generate(const SynthSpec& spec) {
    spec.validate();
    const std::size_t ids = spec.num_identities;
    const std::size_t per = spec.per_identity_per_modality;
    const std::size_t d = spec.dim;

    std::vector<std::vector<double>> prototypes(ids);
    for (std::size_t id = 0; id < ids; ++id) {
        SplitMix64 rng(detail::stream_seed(spec.seed, detail::kStreamPrototype, id, 0));
        auto& proto = prototypes[id];
        proto.resize(d);
        double sum_sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            proto[j] = rng.next_gaussian();
            sum_sq += proto[j] * proto[j];
        }
        const double norm = std::sqrt(sum_sq);
        if (norm < 1e-12) {
            proto.assign(d, 0.0);
            proto[0] = 1.0;
        } else {
            for (auto& v : proto) v /= norm;
        }
    }

    std::vector<std::vector<double>> offsets(2, std::vector<double>(d, 0.0));
    for (std::size_t mod = 0; mod < 2; ++mod) {
        SplitMix64 rng(detail::stream_seed(spec.seed, detail::kStreamModalityOffset, mod, 0));
        for (std::size_t j = 0; j < d; ++j) {
            offsets[mod][j] = spec.modality_offset_sigma * rng.next_gaussian();
        }
    }

    const double noise_coord = spec.noise_sigma / std::sqrt(static_cast<double>(d));
    auto make_set = [&](std::size_t mod) {
        FeatureSet fs;
        fs.count = ids * per;
        fs.dim = d;
        fs.modality = mod == 0 ? Modality::visible : Modality::infrared;
        fs.embeddings.resize(fs.count * d);
        fs.person_ids.resize(fs.count);
        fs.camera_ids.assign(fs.count, mod == 0 ? 1 : 2);
        for (std::size_t id = 0; id < ids; ++id) {
            SplitMix64 rng(detail::stream_seed(spec.seed, detail::kStreamSampleNoise, id, mod));
            for (std::size_t s = 0; s < per; ++s) {
                const std::size_t row = id * per + s;
                fs.person_ids[row] = static_cast<std::int64_t>(id + 1);
                float* dst = fs.embeddings.data() + row * d;
                for (std::size_t j = 0; j < d; ++j) {
                    const double v =
                        prototypes[id][j] + offsets[mod][j] + noise_coord * rng.next_gaussian();
                    dst[j] = static_cast<float>(v);
                }
            }
        }
        return fs;
    };

    return {make_set(0), make_set(1)};
}

} // namespace crossrank
