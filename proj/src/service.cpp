#include "gnssrag/service.hpp"

#include <chrono>
#include <httplib.h>

#include "gnssrag/codec.hpp"
#include "gnssrag/error.hpp"

namespace gnssrag {

namespace {

using Json = nlohmann::json;

/// Client-side problem with the request body; `field` is a JSON pointer.
struct BadRequest {
    std::string field;
    std::string message;
};

void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

Json parse_body(const httplib::Request& req) {
    try {
        Json j = Json::parse(req.body);
        if (!j.is_object()) throw BadRequest{"", "body must be a JSON object"};
        return j;
    } catch (const Json::exception& e) {
        throw BadRequest{"", std::string("body is not valid JSON: ") + e.what()};
    }
}

std::size_t read_k(const Json& body, std::size_t fallback) {
    if (!body.contains("k")) return fallback;
    const auto& k = body["k"];
    if (!k.is_number_integer() || k.get<long long>() < 1) throw BadRequest{"/k", "k must be a positive integer"};
    return k.get<std::size_t>();
}

/// Snapshot from snapshot_id or snapshot_b64; nullopt if neither is present.
std::optional<Snapshot> read_snapshot_field(const Json& body, const Pipeline& pipeline) {
    if (body.contains("snapshot_id")) {
        if (!body["snapshot_id"].is_number_unsigned()) throw BadRequest{"/snapshot_id", "must be a non-negative integer"};
        return pipeline.lookup_snapshot(body["snapshot_id"].get<std::uint64_t>());
    }
    if (body.contains("snapshot_b64")) {
        if (!body["snapshot_b64"].is_string()) throw BadRequest{"/snapshot_b64", "must be a base64 string"};
        try {
            return snapshot_from_b64(body["snapshot_b64"].get<std::string>());
        } catch (const Error& e) {
            throw BadRequest{"/snapshot_b64", e.what()};
        }
    }
    return std::nullopt;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

// Runs a handler and converts failures into the documented status codes.
template <typename F>
void guarded(httplib::Response& res, F&& handler) {
    try {
        handler();
    } catch (const BadRequest& e) {
        reply(res, 400, {{"error", e.message}, {"field", e.field}});
    } catch (const StageError& e) {
        if (e.stage() == "load" && e.kind() == ErrorKind::Io)
            reply(res, 404, {{"error", e.what()}, {"stage", e.stage()}});
        else if (e.kind() == ErrorKind::ParameterDomain || e.kind() == ErrorKind::Contract)
            reply(res, 400, {{"error", e.what()}, {"stage", e.stage()}, {"field", ""}});
        else
            reply(res, 502, {{"error", e.what()}, {"stage", e.stage()}});
    } catch (const std::exception& e) {
        reply(res, 500, {{"error", e.what()}});
    }
}

}  // namespace

Snapshot snapshot_from_b64(std::string_view b64, std::uint64_t id) {
    Snapshot snap;
    snap.id = id;
    snap.data = codec::bytes_to_floats(codec::base64_decode(b64));
    validate_snapshot(snap);
    return snap;
}

Service::Service(std::shared_ptr<const Pipeline> pipeline)
    : pipeline_(std::move(pipeline)), server_(std::make_unique<httplib::Server>()) {
    server_->set_payload_max_length(kMaxRequestBytes);
    install_routes();
}

Service::~Service() { stop(); }

void Service::install_routes() {
    server_->Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, {{"status", "ok"}, {"index_size", pipeline_->index().size()}});
    });

    server_->Post("/query", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto start = std::chrono::steady_clock::now();
            const Json body = parse_body(req);
            const auto snap = read_snapshot_field(body, *pipeline_);
            if (!snap) throw BadRequest{"/snapshot_id", "one of snapshot_id or snapshot_b64 is required"};
            if (!body.contains("question") || !body["question"].is_string())
                throw BadRequest{"/question", "question must be a string"};
            QueryText q{body["question"].get<std::string>(), DetailLevel::General};
            if (body.contains("detail_level")) {
                if (!body["detail_level"].is_string()) throw BadRequest{"/detail_level", "must be a string"};
                try {
                    q.detail_level = parse_detail_level(body["detail_level"].get<std::string>());
                } catch (const ParameterError& e) {
                    throw BadRequest{"/detail_level", e.what()};
                }
            }
            const std::size_t k = read_k(body, pipeline_->config().k);
            GenParams params = pipeline_->config().params;
            if (body.contains("params")) {
                try {
                    params = gen_params_from_json(body["params"]);
                } catch (const ParameterError& e) {
                    throw BadRequest{"/" + e.field(), e.what()};
                }
            }
            const QueryResult r = pipeline_->query(*snap, q, k, params);
            reply(res, 200,
                  {{"description", r.description.text},
                   {"backend", std::string(to_string(r.description.backend))},
                   {"token_count", r.description.token_count},
                   {"truncated", r.description.truncated},
                   {"context", hits_to_json(r.context.hits)},
                   {"stage_latency_ms",
                    {{"embed", r.latency.embed_ms},
                     {"retrieve", r.latency.retrieve_ms},
                     {"assemble", r.latency.assemble_ms},
                     {"describe", r.latency.describe_ms}}},
                   {"latency_ms", elapsed_ms(start)}});
        });
    });

    server_->Post("/classify", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto start = std::chrono::steady_clock::now();
            const Json body = parse_body(req);
            const std::size_t k = read_k(body, pipeline_->config().k);
            Prediction p;
            if (const auto snap = read_snapshot_field(body, *pipeline_)) {
                p = pipeline_->classify(*snap, k);
            } else if (body.contains("vector")) {
                if (!body["vector"].is_array()) throw BadRequest{"/vector", "must be an array of numbers"};
                std::vector<float> v;
                for (const auto& x : body["vector"]) {
                    if (!x.is_number()) throw BadRequest{"/vector", "must be an array of numbers"};
                    v.push_back(x.get<float>());
                }
                if (v.size() != pipeline_->index().read([](const VectorIndex& i) { return i.dimension(); }))
                    throw BadRequest{"/vector", DimensionError(kEmbeddingDim, v.size()).what()};
                try {
                    p = pipeline_->classify(v, k);
                } catch (const StageError& e) {
                    if (e.kind() == ErrorKind::DataIntegrity || e.kind() == ErrorKind::Contract)
                        throw BadRequest{"/vector", e.what()};
                    throw;
                }
            } else {
                throw BadRequest{"/snapshot_id", "one of snapshot_id, snapshot_b64 or vector is required"};
            }
            Json out = to_json(p);
            out["latency_ms"] = elapsed_ms(start);
            reply(res, 200, out);
        });
    });
}

bool Service::listen(const std::string& host, int port) { return server_->listen(host, port); }

int Service::start_background(const std::string& host) {
    const int port = server_->bind_to_any_port(host);
    if (port < 0) throw IoError("cannot bind an HTTP port on " + host);
    worker_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port;
}

void Service::stop() {
    if (server_) server_->stop();
    if (worker_.joinable()) worker_.join();
}

}  // namespace gnssrag
