#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <span>
#include <vector>

#include "gnssrag/signalgen.hpp"

namespace gnssrag {

inline constexpr std::uint16_t kSnapshotFileVersion = 1;
inline constexpr int kManifestFormatVersion = 1;

/// Binary snapshot: "GSNP", u16 version, 1024 x 34 little-endian f32, channel-major.
std::vector<std::uint8_t> encode_snapshot(const Snapshot& snap);
/// Decodes the matrix only; id and metadata come from the sidecar.
std::vector<float> decode_snapshot_matrix(std::span<const std::uint8_t> bytes);

/// Writes <path> and its JSON sidecar <path with .json extension>.
void write_snapshot(const Snapshot& snap, const std::filesystem::path& path);
Snapshot read_snapshot(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& snapshot_path);
/// File name used for snapshot `id` inside a dataset directory.
std::string snapshot_file_name(std::uint64_t id);

struct DatasetConfig {
    std::map<InterferenceType, std::size_t> counts;
    std::vector<double> bandwidths{2.0, 5.0, 10.0, 20.0, 40.0, 60.0};
    std::vector<double> powers{-10.0, -5.0, 0.0, 4.0, 10.0};
    std::vector<int> scenarios{1, 2, 3, 4, 5, 6, 7, 8};
    std::uint64_t base_seed = 0;

    /// Same count for every class, including the clean one.
    static DatasetConfig uniform(std::size_t per_class, std::uint64_t base_seed);
    void validate() const;
};

struct ManifestEntry {
    std::uint64_t id = 0;
    std::string file;  // relative to the manifest directory
    JammerSpec spec;

    bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
    int format_version = kManifestFormatVersion;
    std::vector<ManifestEntry> entries;
    std::map<InterferenceType, std::size_t> counts;

    /// Entry count equals the per-class sum and ids are unique.
    void validate() const;
    bool operator==(const DatasetManifest&) const = default;
};

void to_json(nlohmann::json& j, const DatasetManifest& manifest);
void from_json(const nlohmann::json& j, DatasetManifest& manifest);

/// Entries of a dataset without touching the filesystem. Entry i has seed
/// and id base_seed + i; classes appear in kAllTypes order.
DatasetManifest plan_dataset(const DatasetConfig& config);

/// Plans, synthesises and writes every snapshot plus manifest.json into out_dir.
DatasetManifest generate_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir);

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

}  // namespace gnssrag
