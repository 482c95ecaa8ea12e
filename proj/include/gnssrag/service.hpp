#pragma once

#include <memory>
#include <string>
#include <thread>

#include "gnssrag/pipeline.hpp"

namespace httplib {
class Server;
}

namespace gnssrag {

/// Request bodies above this size are answered with 413.
inline constexpr std::size_t kMaxRequestBytes = 1u << 20;

/// HTTP front end over a Pipeline:
///   GET  /healthz   -> {"status":"ok","index_size":N}
///   POST /query     {snapshot_id | snapshot_b64, question, detail_level, k, params}
///   POST /classify  {snapshot_id | snapshot_b64 | vector, k}
/// Malformed bodies get 400 with a JSON-pointer `field`, backend failures 502
/// with the failing `stage`.
class Service {
public:
    explicit Service(std::shared_ptr<const Pipeline> pipeline);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Blocks serving on host:port.
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and serves on a background thread; returns the port.
    int start_background(const std::string& host = "127.0.0.1");
    void stop();

private:
    void install_routes();

    std::shared_ptr<const Pipeline> pipeline_;
    std::unique_ptr<httplib::Server> server_;
    std::thread worker_;
};

/// Decodes a base64 little-endian f32 1024 x 34 matrix into a snapshot.
Snapshot snapshot_from_b64(std::string_view b64, std::uint64_t id = 0);

}  // namespace gnssrag
