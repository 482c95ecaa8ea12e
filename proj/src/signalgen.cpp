#include "gnssrag/signalgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gnssrag/error.hpp"
#include "gnssrag/rng.hpp"

namespace gnssrag {

namespace {

constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kInterferenceStream = 2;

bool in_closed(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::size_t cell(std::size_t channel, std::size_t bin) { return channel * kTimeBins + bin; }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::vector<float> draw_noise(std::uint64_t seed) {
    Rng rng(derive_seed(seed, kNoiseStream));
    std::vector<float> noise(kSnapshotCells);
    for (std::size_t c = 0; c < kChannels; ++c) {
        const double mean = kNoiseFloorDb + passband_ripple_db(c);
        for (std::size_t t = 0; t < kTimeBins; ++t) {
            double z = rng.normal();
            while (std::abs(z) > kNoiseTruncationSigma) z = rng.normal();
            noise[cell(c, t)] = static_cast<float>(mean + kNoiseSigmaDb * z);
        }
    }
    return noise;
}

void fill_channels(std::vector<double>& layer, std::size_t first, std::size_t last, std::size_t bin, double power) {
    for (std::size_t c = first; c < last; ++c) {
        auto& v = layer[cell(c, bin)];
        v = std::max(v, power);
    }
}

// Sub-channel window [lo, hi) deposited with fractional coverage so that the
// power centroid of the bin equals the window centre exactly.
void deposit_window(std::vector<double>& layer, double lo, double hi, std::size_t bin, double power) {
    const auto first = static_cast<std::size_t>(std::floor(lo));
    const auto last = static_cast<std::size_t>(std::ceil(hi));
    for (std::size_t c = first; c < last && c < kChannels; ++c) {
        const double overlap = std::min(hi, static_cast<double>(c + 1)) - std::max(lo, static_cast<double>(c));
        if (overlap > 0.0) layer[cell(c, bin)] += power * overlap;
    }
}

// Tone of width `width` centred near `centre`, clipped to the band.
void fill_tone(std::vector<double>& layer, const ChannelBand& band, std::size_t centre, std::size_t width,
               double power) {
    const std::size_t half = width / 2;
    std::size_t first = centre >= band.first + half ? centre - half : band.first;
    std::size_t last = std::min(first + width, band.end());
    for (std::size_t t = 0; t < kTimeBins; ++t) fill_channels(layer, first, last, t, power);
}

std::vector<double> synthesize_interference(const JammerSpec& spec) {
    std::vector<double> layer(kSnapshotCells, 0.0);
    if (spec.intf_type == InterferenceType::None) return layer;

    Rng rng(derive_seed(spec.seed, kInterferenceStream));
    const ChannelBand band = interference_band(spec);
    const std::size_t n = band.count;
    const double peak = db_to_linear(kInterferenceHeadroomDb + spec.power);

    switch (spec.intf_type) {
        case InterferenceType::Chirp: {
            const double width = std::max(1.0, static_cast<double>(n) / 8.0);
            const bool upward = rng.uniform() < 0.5;
            for (std::size_t t = 0; t < kTimeBins; ++t) {
                const double frac = static_cast<double>(t) / static_cast<double>(kTimeBins - 1);
                const double pos = upward ? frac : 1.0 - frac;
                const double centre = static_cast<double>(band.first) + width / 2.0 + (static_cast<double>(n) - width) * pos;
                deposit_window(layer, centre - width / 2.0, centre + width / 2.0, t, peak);
            }
            break;
        }
        case InterferenceType::FreqHopper: {
            // Hop set of 8 channels spread over the band, separated by guard gaps.
            constexpr std::size_t kDwell = 4;
            constexpr std::int64_t kHopChannels = 8;
            const double spacing = static_cast<double>(n) / kHopChannels;
            const auto width = static_cast<std::size_t>(std::max(1L, std::lround(spacing / 2.0)));
            for (std::size_t start_bin = 0; start_bin < kTimeBins; start_bin += kDwell) {
                const auto slot = static_cast<double>(rng.uniform_int(0, kHopChannels - 1));
                const auto centre = band.first + static_cast<std::size_t>(std::floor((slot + 0.5) * spacing));
                const std::size_t first = std::max(band.first, centre >= width / 2 ? centre - width / 2 : 0);
                const std::size_t last = std::min(first + width, band.end());
                for (std::size_t t = start_bin; t < std::min(start_bin + kDwell, kTimeBins); ++t)
                    fill_channels(layer, first, last, t, peak);
            }
            break;
        }
        case InterferenceType::Modulated: {
            const auto width = static_cast<std::size_t>(std::max(1L, std::lround(static_cast<double>(n) / 32.0)));
            const std::size_t carrier = band.first + n / 2;
            const auto offset = static_cast<std::size_t>(std::lround(static_cast<double>(n) / 4.0));
            fill_tone(layer, band, carrier, width, peak);
            fill_tone(layer, band, carrier >= band.first + offset ? carrier - offset : band.first, width, peak / 4.0);
            fill_tone(layer, band, std::min(carrier + offset, band.end() - 1), width, peak / 4.0);
            break;
        }
        case InterferenceType::Multitone: {
            const auto width = static_cast<std::size_t>(std::max(1L, std::lround(static_cast<double>(n) / 32.0)));
            for (int i = 0; i < 4; ++i) {
                const auto centre =
                    band.first + static_cast<std::size_t>(std::floor((i + 0.5) * static_cast<double>(n) / 4.0));
                fill_tone(layer, band, centre, width, peak);
            }
            break;
        }
        case InterferenceType::Pulsed: {
            // Gating spreads energy into sidelobes that fall off with distance from the band edge.
            constexpr std::size_t kHalfPeriod = 3;
            constexpr double kSidelobe = 0.1;
            const double scale = std::max(1.0, static_cast<double>(n) / 2.0);
            for (std::size_t t = 0; t < kTimeBins; ++t) {
                if ((t / kHalfPeriod) % 2 != 0) continue;
                for (std::size_t c = 0; c < kChannels; ++c) {
                    if (c >= band.first && c < band.end()) {
                        layer[cell(c, t)] = peak;
                        continue;
                    }
                    const double d = c < band.first ? static_cast<double>(band.first - c)
                                                    : static_cast<double>(c - band.end() + 1);
                    const double x = 1.0 + d / scale;
                    layer[cell(c, t)] = peak * kSidelobe / (x * x);
                }
            }
            break;
        }
        case InterferenceType::Noise: {
            for (std::size_t c = band.first; c < band.end(); ++c)
                for (std::size_t t = 0; t < kTimeBins; ++t) layer[cell(c, t)] = peak * db_to_linear(-3.0 * rng.uniform());
            break;
        }
        case InterferenceType::None:
            break;
    }
    return layer;
}

std::vector<float> compose(const SignalLayers& layers) {
    std::vector<float> data(kSnapshotCells);
    for (std::size_t i = 0; i < kSnapshotCells; ++i) {
        const double p = layers.interference[i];
        if (p == 0.0) {
            data[i] = layers.noise_db[i];
        } else {
            const double noise_lin = db_to_linear(static_cast<double>(layers.noise_db[i]) - kNoiseFloorDb);
            data[i] = static_cast<float>(kNoiseFloorDb + 10.0 * std::log10(noise_lin + p));
        }
    }
    return data;
}

const SignalLayers& require_layers(const Snapshot& snap) {
    if (!snap.layers) throw StateError("snapshot " + std::to_string(snap.id) + " carries no signal layers");
    return *snap.layers;
}

}  // namespace

double passband_ripple_db(std::size_t channel) {
    const double phase = 2.0 * std::numbers::pi * kPassbandRipplePeriods * (static_cast<double>(channel) + 0.5) /
                         static_cast<double>(kChannels);
    return kPassbandRippleDb * std::cos(phase);
}

std::string_view to_string(InterferenceType type) {
    switch (type) {
        case InterferenceType::None: return "None";
        case InterferenceType::Chirp: return "Chirp";
        case InterferenceType::FreqHopper: return "FreqHopper";
        case InterferenceType::Modulated: return "Modulated";
        case InterferenceType::Multitone: return "Multitone";
        case InterferenceType::Pulsed: return "Pulsed";
        case InterferenceType::Noise: return "Noise";
    }
    return "None";
}

std::string_view display_name(InterferenceType type) {
    switch (type) {
        case InterferenceType::None: return "no interference";
        case InterferenceType::Chirp: return "chirp";
        case InterferenceType::FreqHopper: return "frequency hopper";
        case InterferenceType::Modulated: return "modulated";
        case InterferenceType::Multitone: return "multitone";
        case InterferenceType::Pulsed: return "pulsed";
        case InterferenceType::Noise: return "noise";
    }
    return "no interference";
}

InterferenceType parse_interference_type(std::string_view name) {
    for (auto t : kAllTypes)
        if (to_string(t) == name) return t;
    throw ParameterError("intf_type", "unknown interference type '" + std::string(name) + "'");
}

void JammerSpec::validate() const {
    if (scenario < kMinScenario || scenario > kMaxScenario)
        throw ParameterError("scenario", "must be in [1, 8], got " + std::to_string(scenario));
    if (intf_type == InterferenceType::None) return;
    if (!in_closed(bandwidth, kMinBandwidth, kMaxBandwidth))
        throw ParameterError("bandwidth", "must be in [0.1, 60], got " + std::to_string(bandwidth));
    if (!in_closed(power, kMinPower, kMaxPower))
        throw ParameterError("power", "must be in [-10, 10], got " + std::to_string(power));
}

int bandwidth_bucket(double bandwidth) {
    if (bandwidth <= 2.0) return 0;
    if (bandwidth <= 20.0) return 1;
    return 2;
}

namespace {
constexpr std::array<std::string_view, 3> kBucketNames = {"narrow", "medium", "wide"};
}

std::string JammerSpec::subjammer() const {
    if (intf_type == InterferenceType::None) return "None";
    return std::string(to_string(intf_type)) + "/" + std::string(kBucketNames[bandwidth_bucket(bandwidth)]);
}

std::vector<std::string> all_subjammer_labels() {
    std::vector<std::string> labels{"None"};
    for (auto t : kAllTypes) {
        if (t == InterferenceType::None) continue;
        for (auto b : kBucketNames) labels.push_back(std::string(to_string(t)) + "/" + std::string(b));
    }
    return labels;
}

void to_json(nlohmann::json& j, const JammerSpec& spec) {
    j = nlohmann::json{{"intf_type", std::string(to_string(spec.intf_type))},
                       {"bandwidth", spec.bandwidth},
                       {"power", spec.power},
                       {"scenario", spec.scenario},
                       {"seed", spec.seed}};
}

void from_json(const nlohmann::json& j, JammerSpec& spec) {
    if (!j.is_object()) throw ParameterError("spec", "expected a JSON object");
    spec.intf_type = parse_interference_type(j.at("intf_type").get<std::string>());
    spec.bandwidth = j.value("bandwidth", 0.0);
    spec.power = j.value("power", 0.0);
    spec.scenario = j.at("scenario").get<int>();
    spec.seed = j.value("seed", std::uint64_t{0});
}

std::size_t occupied_channels(double bandwidth) {
    const long n = std::lround(bandwidth / kCaptureSpanMhz * static_cast<double>(kChannels));
    return static_cast<std::size_t>(std::clamp(n, 1L, static_cast<long>(kChannels)));
}

ChannelBand interference_band(const JammerSpec& spec) {
    if (spec.intf_type == InterferenceType::None) return {};
    const std::size_t n = occupied_channels(spec.bandwidth);
    const long first = std::lround(static_cast<double>(kChannels) / 2.0 - static_cast<double>(n) / 2.0);
    return {static_cast<std::size_t>(std::clamp(first, 0L, static_cast<long>(kChannels - n))), n};
}

void validate_snapshot(const Snapshot& snap) {
    if (snap.data.size() != kSnapshotCells)
        throw DataIntegrityError("snapshot " + std::to_string(snap.id) + " has " + std::to_string(snap.data.size()) +
                                 " cells, expected 1024 x 34");
    for (std::size_t i = 0; i < snap.data.size(); ++i)
        if (!std::isfinite(snap.data[i]))
            throw DataIntegrityError("snapshot " + std::to_string(snap.id) + " has a non-finite cell at channel " +
                                     std::to_string(i / kTimeBins) + ", bin " + std::to_string(i % kTimeBins));
}

Snapshot generate_snapshot(const JammerSpec& spec, std::optional<std::uint64_t> id) {
    spec.validate();
    Snapshot snap;
    snap.id = id.value_or(spec.seed);
    snap.meta = spec;
    snap.meta.scenario = 1;
    SignalLayers layers{draw_noise(spec.seed), synthesize_interference(spec)};
    snap.data = compose(layers);
    snap.layers = std::move(layers);
    if (spec.scenario == 1) return snap;
    return apply_multipath(snap, spec.scenario);
}

double multipath_attenuation(int scenario) {
    if (scenario < kMinScenario || scenario > kMaxScenario)
        throw ParameterError("scenario", "must be in [1, 8], got " + std::to_string(scenario));
    return 1.0 - 0.08 * (scenario - 1);
}

Snapshot apply_multipath(const Snapshot& snap, int scenario) {
    const double alpha = multipath_attenuation(scenario);
    if (scenario == 1) return snap;
    const SignalLayers& src = require_layers(snap);
    if (snap.meta.scenario != 1)
        throw StateError("multipath must be applied to a direct-path (scenario 1) snapshot, got scenario " +
                         std::to_string(snap.meta.scenario));

    const double direct_gain = alpha * alpha;
    const double echo_gain = kEchoGain * kEchoGain * direct_gain;
    Snapshot out;
    out.id = snap.id;
    out.meta = snap.meta;
    out.meta.scenario = scenario;
    SignalLayers layers{src.noise_db, std::vector<double>(kSnapshotCells, 0.0)};
    for (std::size_t c = 0; c < kChannels; ++c) {
        for (std::size_t t = 0; t < kTimeBins; ++t) {
            double p = direct_gain * src.interference[cell(c, t)];
            if (t >= kEchoDelayBins) p += echo_gain * src.interference[cell(c, t - kEchoDelayBins)];
            layers.interference[cell(c, t)] = p;
        }
    }
    out.data = compose(layers);
    out.layers = std::move(layers);
    return out;
}

double peak_interference_db(const Snapshot& snap) {
    const auto& layer = require_layers(snap).interference;
    const double peak = *std::max_element(layer.begin(), layer.end());
    if (peak <= 0.0) return -std::numeric_limits<double>::infinity();
    return kNoiseFloorDb + 10.0 * std::log10(peak);
}

double interference_energy(const Snapshot& snap) {
    double total = 0.0;
    for (double p : require_layers(snap).interference) total += p;
    return total;
}

}  // namespace gnssrag
