#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace gnssrag {

inline constexpr std::size_t kChannels = 1024;
inline constexpr std::size_t kTimeBins = 34;
inline constexpr std::size_t kSnapshotCells = kChannels * kTimeBins;

/// Display-relative noise floor; values carry no absolute calibration.
inline constexpr double kNoiseFloorDb = -100.0;
inline constexpr double kNoiseSigmaDb = 2.0;
/// Front-end passband ripple: a fixed cosine across the capture, zero mean over all channels.
inline constexpr double kPassbandRippleDb = 1.0;
inline constexpr int kPassbandRipplePeriods = 4;
/// Noise draws are truncated at this many sigma; with the ripple, clean snapshots stay below floor + 6 dB.
inline constexpr double kNoiseTruncationSigma = 2.25;
/// Interference peak sits this far above the floor at power 0.
inline constexpr double kInterferenceHeadroomDb = 20.0;

inline constexpr double kMinBandwidth = 0.1;
inline constexpr double kMaxBandwidth = 60.0;
inline constexpr double kMinPower = -10.0;
inline constexpr double kMaxPower = 10.0;
inline constexpr int kMinScenario = 1;
inline constexpr int kMaxScenario = 8;
/// Bandwidth values are read as MHz over this capture span.
inline constexpr double kCaptureSpanMhz = 100.0;

inline constexpr std::size_t kEchoDelayBins = 2;
inline constexpr double kEchoGain = 0.3;

enum class InterferenceType : std::uint8_t { None, Chirp, FreqHopper, Modulated, Multitone, Pulsed, Noise };

inline constexpr std::array<InterferenceType, 7> kAllTypes = {
    InterferenceType::None,      InterferenceType::Chirp,  InterferenceType::FreqHopper, InterferenceType::Modulated,
    InterferenceType::Multitone, InterferenceType::Pulsed, InterferenceType::Noise,
};

std::string_view to_string(InterferenceType type);
/// Lower-case prose name ("chirp", "frequency hopper", ...).
std::string_view display_name(InterferenceType type);
/// Inverse of to_string; throws ParameterError("intf_type") on unknown names.
InterferenceType parse_interference_type(std::string_view name);

struct JammerSpec {
    InterferenceType intf_type = InterferenceType::None;
    double bandwidth = 0.0;  // ignored for None
    double power = 0.0;      // ignored for None
    int scenario = 1;
    std::uint64_t seed = 0;

    /// Throws ParameterError naming the first out-of-range field.
    void validate() const;

    /// Finer label: type crossed with a bandwidth bucket, "None" for the clean class.
    std::string subjammer() const;

    bool operator==(const JammerSpec&) const = default;
};

/// Bucket index of a bandwidth: 0 for [0.1, 2], 1 for (2, 20], 2 for (20, 60].
int bandwidth_bucket(double bandwidth);
/// All subjammer labels in a fixed order (clean class first).
std::vector<std::string> all_subjammer_labels();

void to_json(nlohmann::json& j, const JammerSpec& spec);
void from_json(const nlohmann::json& j, JammerSpec& spec);

/// Contiguous channel range [first, first + count) occupied by an interferer.
struct ChannelBand {
    std::size_t first = 0;
    std::size_t count = 0;
    std::size_t end() const { return first + count; }
};

/// Deterministic noise-floor offset of a channel, in dB.
double passband_ripple_db(std::size_t channel);

/// Occupied channel count: max(1, round(bandwidth / 100 MHz * 1024)).
std::size_t occupied_channels(double bandwidth);
/// The declared band, centred on the middle of the capture.
ChannelBand interference_band(const JammerSpec& spec);

/// Noise and interference kept apart so multipath can act on interference only.
struct SignalLayers {
    std::vector<float> noise_db;        // channel-major, dB
    std::vector<double> interference;   // channel-major, linear power relative to the floor mean
};

struct Snapshot {
    std::uint64_t id = 0;
    JammerSpec meta;
    std::vector<float> data;  // channel-major (channel * kTimeBins + bin), dB
    /// Present on freshly generated snapshots; absent after loading from disk.
    std::optional<SignalLayers> layers;

    float at(std::size_t channel, std::size_t bin) const { return data[channel * kTimeBins + bin]; }
};

/// Throws DataIntegrityError on wrong dimensions or non-finite cells.
void validate_snapshot(const Snapshot& snap);

/// Deterministic synthesis: identical spec gives a bit-identical matrix.
/// The id defaults to the seed.
Snapshot generate_snapshot(const JammerSpec& spec, std::optional<std::uint64_t> id = std::nullopt);

/// Amplitude attenuation for a multipath scenario: 1 - 0.08 (s - 1).
double multipath_attenuation(int scenario);

/// Scenario 1 returns the input unchanged. Larger scenarios require a
/// direct-path snapshot (scenario 1, layers present) and attenuate its
/// interference plus add a single delayed echo.
Snapshot apply_multipath(const Snapshot& snap, int scenario);

/// floor + 10 log10(max interference power); -infinity for a clean snapshot.
double peak_interference_db(const Snapshot& snap);
/// Sum of the linear interference layer.
double interference_energy(const Snapshot& snap);

}  // namespace gnssrag
