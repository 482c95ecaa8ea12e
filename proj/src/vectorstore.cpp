#include "gnssrag/vectorstore.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <numeric>

#include "gnssrag/codec.hpp"
#include "gnssrag/error.hpp"

namespace gnssrag {

namespace {

constexpr std::string_view kIndexMagic = "GVIX";
constexpr std::size_t kHeaderBytes = 4 + 2 + 1 + 4 + 8;

}  // namespace

std::string_view to_string(Metric metric) { return metric == Metric::Cosine ? "cosine" : "l2"; }

Metric parse_metric(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "cosine") return Metric::Cosine;
    if (lower == "l2") return Metric::L2;
    throw ParameterError("metric", "unknown metric '" + std::string(name) + "'");
}

bool ranks_before(Metric metric, const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return metric == Metric::Cosine ? a.score > b.score : a.score < b.score;
    return a.id < b.id;
}

VectorIndex::VectorIndex(Metric metric, std::size_t dimension) : metric_(metric), dimension_(dimension) {
    if (dimension == 0) throw ParameterError("dimension", "must be positive");
}

std::uint64_t VectorIndex::add(std::uint64_t id, std::span<const float> vector, const JammerSpec& metadata) {
    if (vector.size() != dimension_) throw DimensionError(dimension_, vector.size());
    double norm2 = 0.0;
    for (float v : vector) {
        if (!std::isfinite(v)) throw DataIntegrityError("vector for id " + std::to_string(id) + " has a non-finite component");
        norm2 += static_cast<double>(v) * v;
    }
    if (metric_ == Metric::Cosine && std::abs(std::sqrt(norm2) - 1.0) > 1e-6)
        throw ContractError("cosine index requires unit vectors; id " + std::to_string(id) + " has norm " +
                            std::to_string(std::sqrt(norm2)));
    if (positions_.contains(id)) throw UniquenessError("id " + std::to_string(id) + " already present");
    positions_.emplace(id, ids_.size());
    ids_.push_back(id);
    vectors_.insert(vectors_.end(), vector.begin(), vector.end());
    metadata_.push_back(metadata);
    return id;
}

std::vector<SearchHit> VectorIndex::search(std::span<const float> query, std::size_t k, ScanMode mode) const {
    if (empty()) throw StateError("search on an empty index");
    if (k == 0) throw ParameterError("k", "must be at least 1");
    if (query.size() != dimension_) throw DimensionError(dimension_, query.size());
    for (float v : query)
        if (!std::isfinite(v)) throw DataIntegrityError("query has a non-finite component");

    std::vector<double> scores(size());
    if (mode == ScanMode::Parallel)
        kernels::parallel::score_rows(metric_, vectors_, dimension_, query, scores);
    else
        kernels::serial::score_rows(metric_, vectors_, dimension_, query, scores);

    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t take = std::min(k, size());
    const bool cosine = metric_ == Metric::Cosine;
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return cosine ? scores[a] > scores[b] : scores[a] < scores[b];
                          return ids_[a] < ids_[b];
                      });
    std::vector<SearchHit> hits;
    hits.reserve(take);
    for (std::size_t i = 0; i < take; ++i) hits.push_back({ids_[order[i]], scores[order[i]], metadata_[order[i]]});
    return hits;
}

std::optional<std::size_t> VectorIndex::find(std::uint64_t id) const {
    auto it = positions_.find(id);
    if (it == positions_.end()) return std::nullopt;
    return it->second;
}

bool VectorIndex::operator==(const VectorIndex& other) const {
    if (metric_ != other.metric_ || dimension_ != other.dimension_ || ids_ != other.ids_ || metadata_ != other.metadata_)
        return false;
    // Bitwise comparison so that -0.0 / 0.0 and NaN payloads count as differences.
    return vectors_.size() == other.vectors_.size() &&
           std::memcmp(vectors_.data(), other.vectors_.data(), vectors_.size() * sizeof(float)) == 0;
}

std::vector<std::uint8_t> encode_index(const VectorIndex& index) {
    codec::ByteWriter w;
    w.put_string(kIndexMagic);
    w.put(kIndexFileVersion);
    w.put(static_cast<std::uint8_t>(index.metric()));
    w.put(static_cast<std::uint32_t>(index.dimension()));
    w.put(static_cast<std::uint64_t>(index.size()));
    w.put(codec::crc32(w.bytes()));

    codec::ByteWriter records;
    for (std::size_t i = 0; i < index.size(); ++i) {
        records.put(index.id_at(i));
        for (float v : index.vector_at(i)) records.put(v);
        const std::string meta = nlohmann::json(index.metadata_at(i)).dump();
        records.put(static_cast<std::uint32_t>(meta.size()));
        records.put_string(meta);
    }
    w.put_bytes(records.bytes());
    w.put(codec::crc32(records.bytes()));
    return w.release();
}

VectorIndex decode_index(std::span<const std::uint8_t> bytes) {
    codec::ByteReader r(bytes);
    const auto magic = r.get_bytes(4, "magic");
    if (!std::equal(magic.begin(), magic.end(), kIndexMagic.begin())) throw FormatError(0, "bad index magic");
    const auto version = r.get<std::uint16_t>("version");
    if (version != kIndexFileVersion) throw FormatError(4, "unsupported index version " + std::to_string(version));
    const auto metric_byte = r.get<std::uint8_t>("metric");
    const auto dimension = r.get<std::uint32_t>("dimension");
    const auto count = r.get<std::uint64_t>("count");
    const auto header_crc = r.get<std::uint32_t>("header checksum");
    if (header_crc != codec::crc32(bytes.subspan(0, kHeaderBytes))) throw FormatError(kHeaderBytes, "header checksum mismatch");
    if (metric_byte > static_cast<std::uint8_t>(Metric::L2))
        throw FormatError(6, "unknown metric code " + std::to_string(metric_byte));
    if (dimension == 0) throw FormatError(7, "zero dimension");

    // Delimit and checksum the record section before decoding any of it.
    const std::size_t records_begin = r.position();
    const std::size_t min_record = 8 + 4 * static_cast<std::size_t>(dimension) + 4;
    if (count > r.remaining() / min_record) throw FormatError(records_begin, "record count exceeds file size");
    for (std::uint64_t i = 0; i < count; ++i) {
        r.get_bytes(8 + 4 * static_cast<std::size_t>(dimension), "record vector");
        const auto len = r.get<std::uint32_t>("metadata length");
        r.get_bytes(len, "metadata");
    }
    const std::size_t records_end = r.position();
    const auto records_crc = r.get<std::uint32_t>("record checksum");
    if (records_crc != codec::crc32(bytes.subspan(records_begin, records_end - records_begin)))
        throw FormatError(records_end, "record section checksum mismatch");
    if (r.remaining() != 0) throw FormatError(r.position(), "trailing bytes after record section");

    VectorIndex index(static_cast<Metric>(metric_byte), dimension);
    codec::ByteReader rec(bytes, records_begin);
    std::vector<float> vec(dimension);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::size_t at = rec.position();
        const auto id = rec.get<std::uint64_t>("id");
        for (auto& v : vec) v = rec.get<float>("vector");
        const auto len = rec.get<std::uint32_t>("metadata length");
        const auto meta_bytes = rec.get_bytes(len, "metadata");
        JammerSpec meta;
        try {
            meta = nlohmann::json::parse(meta_bytes.begin(), meta_bytes.end()).get<JammerSpec>();
        } catch (const std::exception& e) {
            throw FormatError(at, std::string("bad record metadata: ") + e.what());
        }
        try {
            index.add(id, vec, meta);
        } catch (const Error& e) {
            throw FormatError(at, std::string("invalid record: ") + e.what());
        }
    }
    return index;
}

void save_index(const VectorIndex& index, const std::filesystem::path& path) {
    codec::write_file(path.string(), encode_index(index));
}

VectorIndex load_index(const std::filesystem::path& path) { return decode_index(codec::read_file(path.string())); }

std::uint64_t SharedIndex::add(std::uint64_t id, std::span<const float> vector, const JammerSpec& metadata) {
    std::unique_lock lock(mutex_);
    return index_.add(id, vector, metadata);
}

std::vector<SearchHit> SharedIndex::search(std::span<const float> query, std::size_t k) const {
    std::shared_lock lock(mutex_);
    return index_.search(query, k);
}

std::size_t SharedIndex::size() const {
    std::shared_lock lock(mutex_);
    return index_.size();
}

Metric SharedIndex::metric() const {
    std::shared_lock lock(mutex_);
    return index_.metric();
}

void SharedIndex::save(const std::filesystem::path& path) const {
    std::vector<std::uint8_t> bytes;
    {
        std::shared_lock lock(mutex_);
        bytes = encode_index(index_);
    }
    codec::write_file(path.string(), bytes);
}

VectorIndex SharedIndex::snapshot() const {
    std::shared_lock lock(mutex_);
    return index_;
}

}  // namespace gnssrag
