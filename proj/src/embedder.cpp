#include "gnssrag/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <httplib.h>

#include "gnssrag/codec.hpp"
#include "gnssrag/error.hpp"
#include "gnssrag/http_url.hpp"
#include "gnssrag/kernels.hpp"
#include "gnssrag/rng.hpp"

namespace gnssrag {

std::string_view to_string(EmbeddingSource source) {
    return source == EmbeddingSource::Baseline ? "Baseline" : "External";
}

void validate_embedding(const Embedding& embedding) {
    if (embedding.vector.size() != kEmbeddingDim) throw DimensionError(kEmbeddingDim, embedding.vector.size());
    double norm2 = 0.0;
    for (float v : embedding.vector) {
        if (!std::isfinite(v)) throw DataIntegrityError("embedding has a non-finite component");
        norm2 += static_cast<double>(v) * v;
    }
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6)
        throw DataIntegrityError("embedding norm " + std::to_string(std::sqrt(norm2)) + " is not 1");
}

std::vector<double> channel_features(const Snapshot& snap) {
    validate_snapshot(snap);
    std::vector<double> features(kChannels);
    for (std::size_t c = 0; c < kChannels; ++c) {
        double mean_lin = 0.0;
        for (std::size_t t = 0; t < kTimeBins; ++t) mean_lin += std::pow(10.0, static_cast<double>(snap.at(c, t)) / 10.0);
        mean_lin /= static_cast<double>(kTimeBins);
        features[c] = std::max(0.0, 10.0 * std::log10(mean_lin) + 100.0);
    }
    return features;
}

const std::vector<double>& projection_matrix() {
    static const std::vector<double> matrix = [] {
        std::vector<double> m(kEmbeddingDim * kChannels);
        Rng rng(kProjectionSeed);
        const double scale = 1.0 / std::sqrt(static_cast<double>(kEmbeddingDim));
        for (auto& v : m) v = rng.normal() * scale;
        return m;
    }();
    return matrix;
}

std::vector<float> normalize(std::span<const double> v) {
    double norm2 = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) throw DataIntegrityError("vector has a non-finite component");
        norm2 += x * x;
    }
    if (norm2 == 0.0) throw DataIntegrityError("cannot normalize a zero vector");
    const double inv = 1.0 / std::sqrt(norm2);
    std::vector<float> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] * inv);
    return out;
}

Embedding embed_baseline(const Snapshot& snap) {
    const auto features = channel_features(snap);
    std::vector<double> projected(kEmbeddingDim);
    kernels::parallel::project(projection_matrix(), features, projected);
    return {snap.id, normalize(projected), EmbeddingSource::Baseline};
}

std::string encoder_request_body(const Snapshot& snap) {
    validate_snapshot(snap);
    const nlohmann::json body{{"snapshot_id", snap.id},
                              {"shape", {kChannels, kTimeBins}},
                              {"data", codec::base64_encode(codec::floats_to_bytes(snap.data))}};
    return body.dump();
}

Embedding parse_encoder_response(std::string_view body, std::uint64_t snapshot_id, std::size_t declared_dim) {
    if (declared_dim != kEmbeddingDim) throw DimensionError(kEmbeddingDim, declared_dim);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
        // Python-style encoders emit bare NaN/Infinity tokens, which are not JSON.
        if (body.find("NaN") != std::string_view::npos || body.find("Infinity") != std::string_view::npos)
            throw DataIntegrityError("encoder returned a non-finite component");
        throw MalformedResponseError("encoder response is not valid JSON");
    }
    if (!j.is_object() || !j.contains("vector") || !j["vector"].is_array())
        throw MalformedResponseError("encoder response lacks a 'vector' array");
    const auto& arr = j["vector"];
    if (arr.size() != kEmbeddingDim) throw DimensionError(kEmbeddingDim, arr.size());
    std::vector<double> v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
        // nlohmann maps JSON NaN/Infinity tokens to null, so non-numbers are integrity failures.
        if (!x.is_number()) throw DataIntegrityError("encoder returned a non-numeric component");
        v.push_back(x.get<double>());
    }
    return {snapshot_id, normalize(v), EmbeddingSource::External};
}

Embedding embed_external(const Snapshot& snap, const EncoderHandle& endpoint) {
    if (endpoint.declared_dim != kEmbeddingDim) throw DimensionError(kEmbeddingDim, endpoint.declared_dim);
    const auto url = parse_http_url(endpoint.url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(endpoint.timeout);
    client.set_read_timeout(endpoint.timeout);
    client.set_write_timeout(endpoint.timeout);
    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(url.path, encoder_request_body(snap), "application/json");
    if (!res) {
        const auto elapsed = std::chrono::steady_clock::now() - started;
        if (res.error() == httplib::Error::ConnectionTimeout ||
            (res.error() == httplib::Error::Read && elapsed >= endpoint.timeout))
            throw TimeoutError("encoder at " + endpoint.url + " timed out");
        throw TransportError("encoder at " + endpoint.url + " unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200)
        throw TransportError("encoder at " + endpoint.url + " returned HTTP " + std::to_string(res->status));
    return parse_encoder_response(res->body, snap.id, endpoint.declared_dim);
}

}  // namespace gnssrag
