#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnssrag/signalgen.hpp"

namespace gnssrag {

inline constexpr std::size_t kEmbeddingDim = 512;
/// Seed of the fixed projection matrix; changing it invalidates stored indexes.
inline constexpr std::uint64_t kProjectionSeed = 42;
inline constexpr int kProjectionVersion = 1;

enum class EmbeddingSource : std::uint8_t { Baseline, External };
std::string_view to_string(EmbeddingSource source);

struct Embedding {
    std::uint64_t snapshot_id = 0;
    std::vector<float> vector;
    EmbeddingSource source = EmbeddingSource::Baseline;
};

/// Throws DimensionError / DataIntegrityError unless the vector has 512
/// finite components of unit norm (within 1e-6).
void validate_embedding(const Embedding& embedding);

/// Per-channel mean power in dB, shifted by +100 and clamped at 0.
std::vector<double> channel_features(const Snapshot& snap);

/// Row-major 512 x 1024 matrix of N(0, 1) / sqrt(512) entries, seed 42.
const std::vector<double>& projection_matrix();

/// Deterministic spectral featurizer.
Embedding embed_baseline(const Snapshot& snap);

/// Scales v to unit length. Throws DataIntegrityError for NaN/inf or a zero vector.
std::vector<float> normalize(std::span<const double> v);

struct EncoderHandle {
    std::string url;  // http://host:port/path
    std::size_t declared_dim = kEmbeddingDim;
    std::chrono::milliseconds timeout{30000};
};

/// Request body sent to a remote encoder:
/// {snapshot_id, shape:[1024,34], data: base64 little-endian f32}.
std::string encoder_request_body(const Snapshot& snap);
/// Parses {vector:[...]} and normalizes it. Enforces the declared dimension.
Embedding parse_encoder_response(std::string_view body, std::uint64_t snapshot_id, std::size_t declared_dim);

/// Sends the snapshot to a remote encoder. Each call opens its own
/// connection, so concurrent calls share no state.
Embedding embed_external(const Snapshot& snap, const EncoderHandle& endpoint);

}  // namespace gnssrag
