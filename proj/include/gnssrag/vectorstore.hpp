#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "gnssrag/embedder.hpp"
#include "gnssrag/kernels.hpp"
#include "gnssrag/signalgen.hpp"

namespace gnssrag {

inline constexpr std::uint16_t kIndexFileVersion = 1;

std::string_view to_string(Metric metric);
/// Accepts "cosine" / "l2" (case-insensitive).
Metric parse_metric(std::string_view name);

struct SearchHit {
    std::uint64_t id = 0;
    double score = 0.0;  // Cosine: dot product. L2: euclidean distance.
    JammerSpec metadata;

    bool operator==(const SearchHit&) const = default;
};

/// True if hit a ranks before hit b under the metric; ties go to the smaller id.
bool ranks_before(Metric metric, const SearchHit& a, const SearchHit& b);

enum class ScanMode { Parallel, Serial };

/// Flat, exact vector index. Not internally synchronized; see SharedIndex.
class VectorIndex {
public:
    explicit VectorIndex(Metric metric = Metric::Cosine, std::size_t dimension = kEmbeddingDim);

    /// Appends a record. Throws DimensionError, DataIntegrityError (non-finite),
    /// ContractError (non-unit vector under Cosine) or UniquenessError.
    std::uint64_t add(std::uint64_t id, std::span<const float> vector, const JammerSpec& metadata);
    std::uint64_t add(const Embedding& embedding, const JammerSpec& metadata) {
        return add(embedding.snapshot_id, embedding.vector, metadata);
    }

    /// Exact top-k, best first. Throws StateError on an empty index,
    /// ParameterError for k == 0 and DimensionError for a wrong query size.
    std::vector<SearchHit> search(std::span<const float> query, std::size_t k,
                                  ScanMode mode = ScanMode::Parallel) const;

    Metric metric() const { return metric_; }
    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }

    std::optional<std::size_t> find(std::uint64_t id) const;
    std::uint64_t id_at(std::size_t i) const { return ids_[i]; }
    std::span<const float> vector_at(std::size_t i) const {
        return std::span(vectors_).subspan(i * dimension_, dimension_);
    }
    const JammerSpec& metadata_at(std::size_t i) const { return metadata_[i]; }
    std::span<const float> raw_vectors() const { return vectors_; }

    bool operator==(const VectorIndex& other) const;

private:
    Metric metric_;
    std::size_t dimension_;
    std::vector<std::uint64_t> ids_;
    std::vector<float> vectors_;
    std::vector<JammerSpec> metadata_;
    std::unordered_map<std::uint64_t, std::size_t> positions_;
};

/// File layout (all little-endian):
///   header:  "GVIX" | u16 version | u8 metric | u32 dimension | u64 count | u32 crc32(header)
///   records: count x (u64 id | dimension x f32 | u32 len | len bytes JSON metadata) | u32 crc32(records)
std::vector<std::uint8_t> encode_index(const VectorIndex& index);
/// Throws FormatError (with byte offset) on bad magic, version, truncation or checksum.
VectorIndex decode_index(std::span<const std::uint8_t> bytes);

/// Throws IoError on filesystem failures.
void save_index(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex load_index(const std::filesystem::path& path);

/// Reader-writer wrapper: searches run concurrently, an add is exclusive and
/// never observed half-applied, save serializes a consistent view.
class SharedIndex {
public:
    explicit SharedIndex(VectorIndex index) : index_(std::move(index)) {}

    std::uint64_t add(std::uint64_t id, std::span<const float> vector, const JammerSpec& metadata);
    std::vector<SearchHit> search(std::span<const float> query, std::size_t k) const;
    std::size_t size() const;
    Metric metric() const;
    void save(const std::filesystem::path& path) const;
    VectorIndex snapshot() const;

    /// Runs f(const VectorIndex&) under the shared lock.
    template <typename F>
    decltype(auto) read(F&& f) const {
        std::shared_lock lock(mutex_);
        return f(index_);
    }

private:
    mutable std::shared_mutex mutex_;
    VectorIndex index_;
};

}  // namespace gnssrag
