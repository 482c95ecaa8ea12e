#include <doctest.h>

#include <cstring>
#include <fstream>
#include <set>

#include "gnssrag/codec.hpp"
#include "gnssrag/dataset.hpp"
#include "gnssrag/error.hpp"
#include "test_support.hpp"

using namespace gnssrag;
namespace fs = std::filesystem;

namespace {

// FNV-1a over the file bytes.
std::uint64_t file_hash(const fs::path& path) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::uint8_t b : codec::read_file(path.string())) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

std::map<std::string, std::uint64_t> hash_tree(const fs::path& dir) {
    std::map<std::string, std::uint64_t> out;
    for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = file_hash(e.path());
    return out;
}

}  // namespace

TEST_CASE("576 per class plans 4032 entries with 576 clean") {
    const auto manifest = plan_dataset(DatasetConfig::uniform(576, 0));
    CHECK(manifest.entries.size() == 4032);
    std::size_t clean = 0;
    std::set<std::uint64_t> ids;
    for (const auto& e : manifest.entries) {
        clean += e.spec.intf_type == InterferenceType::None;
        ids.insert(e.id);
        CHECK_NOTHROW(e.spec.validate());
    }
    CHECK(clean == 576);
    CHECK(ids.size() == 4032);
    for (auto t : kAllTypes) CHECK(manifest.counts.at(t) == 576);
}

TEST_CASE("entries draw from the configured grids") {
    DatasetConfig config = DatasetConfig::uniform(30, 500);
    config.bandwidths = {3.0, 45.0};
    config.powers = {-2.0};
    config.scenarios = {2, 7};
    const auto manifest = plan_dataset(config);
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const auto& e = manifest.entries[i];
        CHECK(e.id == 500 + i);
        CHECK(e.spec.seed == e.id);
        CHECK((e.spec.scenario == 2 || e.spec.scenario == 7));
        if (e.spec.intf_type == InterferenceType::None) continue;
        CHECK((e.spec.bandwidth == 3.0 || e.spec.bandwidth == 45.0));
        CHECK(e.spec.power == -2.0);
    }
}

TEST_CASE("all-zero config writes an empty manifest and no snapshots") {
    testing::TempDir dir;
    const auto manifest = generate_dataset(DatasetConfig::uniform(0, 0), dir.path() / "ds");
    CHECK(manifest.entries.empty());
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(dir.path() / "ds")) files += e.path().filename() != "manifest.json";
    CHECK(files == 0);
    CHECK(load_manifest(dir.path() / "ds" / "manifest.json").entries.empty());
}

TEST_CASE("regeneration is byte-identical") {
    testing::TempDir dir;
    DatasetConfig config = DatasetConfig::uniform(3, 42);
    config.counts[InterferenceType::Noise] = 5;
    const auto a = generate_dataset(config, dir.path() / "a");
    const auto b = generate_dataset(config, dir.path() / "b");
    CHECK(a == b);
    CHECK(a.entries.size() == 6 * 3 + 5);
    const auto ha = hash_tree(dir.path() / "a");
    CHECK(ha.size() == 2 * a.entries.size() + 1);
    CHECK(ha == hash_tree(dir.path() / "b"));
    CHECK(load_manifest(dir.path() / "a" / "manifest.json") == a);
}

TEST_CASE("snapshot files round trip through disk") {
    testing::TempDir dir;
    const auto snap = generate_snapshot({InterferenceType::Modulated, 20, 4, 3, 77}, 1234);
    write_snapshot(snap, dir / "s.gsnp");
    CHECK(fs::exists(dir / "s.json"));
    const auto back = read_snapshot(dir / "s.gsnp");
    CHECK(back.id == 1234);
    CHECK(back.meta == snap.meta);
    CHECK(back.data == snap.data);
    CHECK_FALSE(back.layers.has_value());
    const auto bytes = codec::read_file((dir / "s.gsnp").string());
    CHECK(bytes.size() == 4 + 2 + 1024 * 34 * 4);
    CHECK(std::memcmp(bytes.data(), "GSNP", 4) == 0);
}

TEST_CASE("bad snapshot files") {
    testing::TempDir dir;
    const auto snap = generate_snapshot({InterferenceType::Chirp, 2, 4, 1, 7});
    auto bytes = encode_snapshot(snap);
    bytes[1] = 'X';
    CHECK_THROWS_AS(decode_snapshot_matrix(bytes), FormatError);
    bytes = encode_snapshot(snap);
    bytes.resize(bytes.size() - 4);
    CHECK_THROWS_AS(decode_snapshot_matrix(bytes), FormatError);
    CHECK_THROWS_AS(read_snapshot(dir / "nope.gsnp"), IoError);
}

TEST_CASE("invalid grids and paths") {
    DatasetConfig config = DatasetConfig::uniform(2, 0);
    config.bandwidths = {0.05};
    try {
        plan_dataset(config);
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        CHECK(e.field() == "bandwidths");
    }
    config = DatasetConfig::uniform(2, 0);
    config.scenarios = {0};
    CHECK_THROWS_AS(plan_dataset(config), ParameterError);
    config = DatasetConfig::uniform(2, 0);
    config.powers = {11};
    CHECK_THROWS_AS(plan_dataset(config), ParameterError);

    testing::TempDir dir;
    std::ofstream(dir / "blocker") << "x";
    CHECK_THROWS_AS(generate_dataset(DatasetConfig::uniform(1, 0), dir / "blocker"), IoError);
}

TEST_CASE("manifest invariants are enforced on load") {
    testing::TempDir dir;
    auto manifest = plan_dataset(DatasetConfig::uniform(2, 0));
    manifest.entries.pop_back();
    save_manifest(manifest, dir / "m.json");
    CHECK_THROWS_AS(load_manifest(dir / "m.json"), DataIntegrityError);
    manifest = plan_dataset(DatasetConfig::uniform(2, 0));
    manifest.entries[1].id = manifest.entries[0].id;
    save_manifest(manifest, dir / "m.json");
    CHECK_THROWS_AS(load_manifest(dir / "m.json"), UniquenessError);
}
