#pragma once

// =============================================================================
// Binary serialization.
//
// FEAT file, version 1 (feature sets):
//   bytes 0-3   magic "FEAT"
//   byte  4     version (1)
//   bytes 5-8   header length H, unsigned 32-bit little-endian
//   H bytes     UTF-8 JSON  {"n","d","modality","person_ids","camera_ids"}
//   payload     n*d IEEE-754 binary32 little-endian, row-major
//
// SCOR file, version 1 (score/distance matrices): identical layout with magic
// "SCOR" and JSON header {"nq","ng","method","higher_is_better"}.
//
// Writers are deterministic (sorted JSON keys, fixed field set) and atomic
// (temp file + rename), so identical inputs produce identical bytes.
// =============================================================================

#include <atomic>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crossrank/errors.hpp"
#include "crossrank/feature_set.hpp"
#include "crossrank/matrix.hpp"

namespace crossrank {

namespace detail {

inline void append_u32_le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

inline std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void append_f32_le(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    append_u32_le(out, bits);
}

inline float read_f32_le(const unsigned char* p) {
    const std::uint32_t bits = read_u32_le(p);
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    return f;
}

/// Writes bytes to path through a sibling temp file and rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    static std::atomic<unsigned> counter{0};
    auto tmp = path;
    tmp += ".tmp" + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open for writing: " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw IoError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("rename failed for " + path.string() + ": " + ec.message());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path.string());
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

struct RawBlock {
    nlohmann::json header;
    const unsigned char* payload;
    std::size_t payload_bytes;
};

/// Parses the shared container layout and returns the header plus a view of
/// the payload. bytes must outlive the returned view.
inline RawBlock parse_block(const std::string& bytes, const char magic[4], const char* what) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 4 || std::memcmp(bytes.data(), magic, 4) != 0) {
        throw BadMagicError(std::string(what) + ": bad magic");
    }
    if (bytes.size() < 5) {
        throw TruncatedFileError(std::string(what) + ": missing version byte");
    }
    if (p[4] != 1) {
        throw BadVersionError(std::string(what) + ": unsupported version " + std::to_string(p[4]));
    }
    if (bytes.size() < 9) {
        throw TruncatedFileError(std::string(what) + ": missing header length");
    }
    const std::uint32_t hlen = read_u32_le(p + 5);
    if (bytes.size() < 9 + static_cast<std::size_t>(hlen)) {
        throw TruncatedFileError(std::string(what) + ": header shorter than declared");
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.begin() + 9, bytes.begin() + 9 + hlen);
    } catch (const nlohmann::json::exception& e) {
        throw HeaderMismatchError(std::string(what) + ": malformed JSON header: " + e.what());
    }
    return RawBlock{std::move(header), p + 9 + hlen, bytes.size() - 9 - hlen};
}

} // namespace detail

/// Serializes a feature set to the FEAT format; byte output is deterministic.
inline void save_features(const FeatureSet& fs, const std::filesystem::path& path) {
    fs.validate();
    nlohmann::json header;
    header["n"] = fs.count;
    header["d"] = fs.dim;
    header["modality"] = to_string(fs.modality);
    header["person_ids"] = fs.person_ids;
    header["camera_ids"] = fs.camera_ids;
    const std::string htext = header.dump();

    std::string bytes;
    bytes.reserve(9 + htext.size() + fs.embeddings.size() * 4);
    bytes.append("FEAT", 4);
    bytes.push_back(static_cast<char>(1));
    detail::append_u32_le(bytes, static_cast<std::uint32_t>(htext.size()));
    bytes.append(htext);
    for (float v : fs.embeddings) detail::append_f32_le(bytes, v);
    detail::write_file_atomic(path, bytes);
}

inline FeatureSet load_features(const std::filesystem::path& path) {
    const std::string bytes = detail::read_file(path);
    const auto block = detail::parse_block(bytes, "FEAT", "FEAT file");

    FeatureSet fs;
    try {
        fs.count = block.header.at("n").get<std::size_t>();
        fs.dim = block.header.at("d").get<std::size_t>();
        fs.modality = modality_from_string(block.header.at("modality").get<std::string>());
        fs.person_ids = block.header.at("person_ids").get<std::vector<std::int64_t>>();
        fs.camera_ids = block.header.at("camera_ids").get<std::vector<std::int64_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw HeaderMismatchError(std::string("FEAT file: header field error: ") + e.what());
    }
    if (fs.person_ids.size() != fs.count || fs.camera_ids.size() != fs.count) {
        throw HeaderMismatchError("FEAT file: label lengths disagree with n");
    }
    const std::size_t expected = fs.count * fs.dim * 4;
    if (block.payload_bytes < expected) {
        throw TruncatedFileError("FEAT file: payload shorter than n*d floats");
    }
    if (block.payload_bytes > expected) {
        throw HeaderMismatchError("FEAT file: payload longer than n*d floats");
    }
    fs.embeddings.resize(fs.count * fs.dim);
    for (std::size_t i = 0; i < fs.embeddings.size(); ++i) {
        fs.embeddings[i] = detail::read_f32_le(block.payload + i * 4);
    }
    fs.validate();
    return fs;
}

/// A persisted score or distance matrix plus its ranking orientation.
struct ScoreFile {
    std::size_t nq = 0;
    std::size_t ng = 0;
    std::string method;
    bool higher_is_better = true;
    Matrix scores; // nq × ng, stored as float32 on disk
};

inline void save_scores(const ScoreFile& sf, const std::filesystem::path& path) {
    if (sf.scores.rows() != sf.nq || sf.scores.cols() != sf.ng || sf.scores.empty()) {
        throw DimensionError("score matrix shape disagrees with nq/ng");
    }
    nlohmann::json header;
    header["nq"] = sf.nq;
    header["ng"] = sf.ng;
    header["method"] = sf.method;
    header["higher_is_better"] = sf.higher_is_better;
    const std::string htext = header.dump();

    std::string bytes;
    bytes.reserve(9 + htext.size() + sf.nq * sf.ng * 4);
    bytes.append("SCOR", 4);
    bytes.push_back(static_cast<char>(1));
    detail::append_u32_le(bytes, static_cast<std::uint32_t>(htext.size()));
    bytes.append(htext);
    for (double v : sf.scores.data()) detail::append_f32_le(bytes, static_cast<float>(v));
    detail::write_file_atomic(path, bytes);
}

inline ScoreFile load_scores(const std::filesystem::path& path) {
    const std::string bytes = detail::read_file(path);
    const auto block = detail::parse_block(bytes, "SCOR", "score file");

    ScoreFile sf;
    try {
        sf.nq = block.header.at("nq").get<std::size_t>();
        sf.ng = block.header.at("ng").get<std::size_t>();
        sf.method = block.header.at("method").get<std::string>();
        sf.higher_is_better = block.header.at("higher_is_better").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw HeaderMismatchError(std::string("score file: header field error: ") + e.what());
    }
    const std::size_t expected = sf.nq * sf.ng * 4;
    if (block.payload_bytes < expected) {
        throw TruncatedFileError("score file: payload shorter than nq*ng floats");
    }
    if (block.payload_bytes > expected) {
        throw HeaderMismatchError("score file: payload longer than nq*ng floats");
    }
    std::vector<double> data(sf.nq * sf.ng);
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = static_cast<double>(detail::read_f32_le(block.payload + i * 4));
    }
    sf.scores = Matrix(sf.nq, sf.ng, std::move(data));
    return sf;
}

/// FNV-1a 64-bit digest of a file's bytes, reported by the CLI so users can
/// confirm deterministic outputs.
inline std::uint64_t fnv1a_digest(const std::filesystem::path& path) {
    const std::string bytes = detail::read_file(path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace crossrank
