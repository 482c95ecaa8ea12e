#include "gnssrag/dataset.hpp"

#include <mutex>
#include <optional>
#include <set>

#include "gnssrag/codec.hpp"
#include "gnssrag/error.hpp"
#include "gnssrag/rng.hpp"

namespace gnssrag {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kSnapshotMagic = "GSNP";
constexpr std::uint64_t kGridStream = 3;

}  // namespace

std::vector<std::uint8_t> encode_snapshot(const Snapshot& snap) {
    validate_snapshot(snap);
    codec::ByteWriter w;
    w.put_string(kSnapshotMagic);
    w.put(kSnapshotFileVersion);
    for (float v : snap.data) w.put(v);
    return w.release();
}

std::vector<float> decode_snapshot_matrix(std::span<const std::uint8_t> bytes) {
    codec::ByteReader r(bytes);
    const auto magic = r.get_bytes(4, "magic");
    if (!std::equal(magic.begin(), magic.end(), kSnapshotMagic.begin())) throw FormatError(0, "bad snapshot magic");
    const auto version = r.get<std::uint16_t>("version");
    if (version != kSnapshotFileVersion)
        throw FormatError(4, "unsupported snapshot version " + std::to_string(version));
    std::vector<float> data(kSnapshotCells);
    for (auto& v : data) v = r.get<float>("snapshot cell");
    if (r.remaining() != 0) throw FormatError(r.position(), "trailing bytes after snapshot matrix");
    return data;
}

std::string snapshot_file_name(std::uint64_t id) { return "snap_" + std::to_string(id) + ".gsnp"; }

fs::path sidecar_path(const fs::path& snapshot_path) {
    fs::path p = snapshot_path;
    p.replace_extension(".json");
    return p;
}

void write_snapshot(const Snapshot& snap, const fs::path& path) {
    codec::write_file(path.string(), encode_snapshot(snap));
    const nlohmann::json sidecar{{"id", snap.id}, {"spec", snap.meta}};
    const std::string text = sidecar.dump(2) + "\n";
    codec::write_file(sidecar_path(path).string(),
                      std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Snapshot read_snapshot(const fs::path& path) {
    Snapshot snap;
    snap.data = decode_snapshot_matrix(codec::read_file(path.string()));
    const auto side = codec::read_file(sidecar_path(path).string());
    try {
        const auto j = nlohmann::json::parse(side.begin(), side.end());
        snap.id = j.at("id").get<std::uint64_t>();
        snap.meta = j.at("spec").get<JammerSpec>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(0, "bad snapshot sidecar '" + sidecar_path(path).string() + "': " + e.what());
    }
    validate_snapshot(snap);
    return snap;
}

DatasetConfig DatasetConfig::uniform(std::size_t per_class, std::uint64_t base_seed) {
    DatasetConfig c;
    for (auto t : kAllTypes) c.counts[t] = per_class;
    c.base_seed = base_seed;
    return c;
}

void DatasetConfig::validate() const {
    std::size_t total = 0;
    for (const auto& [type, n] : counts) total += n;
    if (total == 0) return;
    bool needs_jammer_grids = false;
    for (const auto& [type, n] : counts) needs_jammer_grids |= (type != InterferenceType::None && n > 0);
    if (scenarios.empty()) throw ParameterError("scenarios", "grid is empty");
    for (int s : scenarios)
        if (s < kMinScenario || s > kMaxScenario)
            throw ParameterError("scenarios", "value " + std::to_string(s) + " outside [1, 8]");
    if (!needs_jammer_grids) return;
    if (bandwidths.empty()) throw ParameterError("bandwidths", "grid is empty");
    if (powers.empty()) throw ParameterError("powers", "grid is empty");
    for (double b : bandwidths)
        if (!(b >= kMinBandwidth && b <= kMaxBandwidth))
            throw ParameterError("bandwidths", "value " + std::to_string(b) + " outside [0.1, 60]");
    for (double p : powers)
        if (!(p >= kMinPower && p <= kMaxPower))
            throw ParameterError("powers", "value " + std::to_string(p) + " outside [-10, 10]");
}

void DatasetManifest::validate() const {
    std::size_t total = 0;
    for (const auto& [type, n] : counts) total += n;
    if (total != entries.size())
        throw DataIntegrityError("manifest lists " + std::to_string(entries.size()) + " entries but counts sum to " +
                                 std::to_string(total));
    std::set<std::uint64_t> ids;
    for (const auto& e : entries)
        if (!ids.insert(e.id).second) throw UniquenessError("duplicate snapshot id " + std::to_string(e.id));
}

void to_json(nlohmann::json& j, const DatasetManifest& manifest) {
    nlohmann::json counts = nlohmann::json::object();
    for (auto t : kAllTypes) {
        auto it = manifest.counts.find(t);
        counts[std::string(to_string(t))] = it == manifest.counts.end() ? 0 : it->second;
    }
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : manifest.entries) entries.push_back({{"id", e.id}, {"file", e.file}, {"spec", e.spec}});
    j = nlohmann::json{{"format_version", manifest.format_version}, {"counts", counts}, {"entries", entries}};
}

void from_json(const nlohmann::json& j, DatasetManifest& manifest) {
    manifest.format_version = j.at("format_version").get<int>();
    if (manifest.format_version != kManifestFormatVersion)
        throw FormatError(0, "unsupported manifest format_version " + std::to_string(manifest.format_version));
    manifest.counts.clear();
    for (const auto& [name, n] : j.at("counts").items()) {
        const auto count = n.get<std::size_t>();
        if (count > 0) manifest.counts[parse_interference_type(name)] = count;
    }
    manifest.entries.clear();
    for (const auto& e : j.at("entries"))
        manifest.entries.push_back({e.at("id").get<std::uint64_t>(), e.at("file").get<std::string>(),
                                    e.at("spec").get<JammerSpec>()});
}

DatasetManifest plan_dataset(const DatasetConfig& config) {
    config.validate();
    DatasetManifest manifest;
    std::uint64_t index = 0;
    for (auto type : kAllTypes) {
        auto it = config.counts.find(type);
        if (it == config.counts.end() || it->second == 0) continue;
        manifest.counts[type] = it->second;
        for (std::size_t k = 0; k < it->second; ++k, ++index) {
            const std::uint64_t seed = config.base_seed + index;
            Rng rng(derive_seed(seed, kGridStream));
            JammerSpec spec;
            spec.intf_type = type;
            spec.seed = seed;
            if (type != InterferenceType::None) {
                spec.bandwidth = config.bandwidths[rng.uniform_int(0, static_cast<std::int64_t>(config.bandwidths.size()) - 1)];
                spec.power = config.powers[rng.uniform_int(0, static_cast<std::int64_t>(config.powers.size()) - 1)];
            }
            spec.scenario = config.scenarios[rng.uniform_int(0, static_cast<std::int64_t>(config.scenarios.size()) - 1)];
            manifest.entries.push_back({seed, snapshot_file_name(seed), spec});
        }
    }
    manifest.validate();
    return manifest;
}

DatasetManifest generate_dataset(const DatasetConfig& config, const fs::path& out_dir) {
    DatasetManifest manifest = plan_dataset(config);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

    std::mutex error_mutex;
    std::optional<std::string> first_error;
    const auto count = static_cast<std::ptrdiff_t>(manifest.entries.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto& entry = manifest.entries[static_cast<std::size_t>(i)];
        try {
            write_snapshot(generate_snapshot(entry.spec, entry.id), out_dir / entry.file);
        } catch (const std::exception& e) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = e.what();
        }
    }
    if (first_error) throw IoError("dataset generation failed: " + *first_error);
    save_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
    const std::string text = nlohmann::json(manifest).dump(2) + "\n";
    codec::write_file(path.string(), std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

DatasetManifest load_manifest(const fs::path& path) {
    const auto bytes = codec::read_file(path.string());
    DatasetManifest manifest;
    try {
        manifest = nlohmann::json::parse(bytes.begin(), bytes.end()).get<DatasetManifest>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(0, "bad manifest '" + path.string() + "': " + e.what());
    }
    manifest.validate();
    return manifest;
}

}  // namespace gnssrag
