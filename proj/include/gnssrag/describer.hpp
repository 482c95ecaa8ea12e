#pragma once

#include <chrono>
#include <optional>
#include <string>

#include "gnssrag/promptkit.hpp"

namespace gnssrag {

enum class DescriberBackend : std::uint8_t { Remote, Templated };
std::string_view to_string(DescriberBackend backend);

struct Description {
    std::string text;
    DescriberBackend backend = DescriberBackend::Templated;
    std::size_t token_count = 0;
    double latency_ms = 0.0;
    bool truncated = false;
};

/// Whitespace token count.
std::size_t count_tokens(std::string_view text);

struct Truncation {
    std::string text;
    std::size_t token_count = 0;
    bool truncated = false;
};

/// Cuts text right after its max_tokens-th whitespace token.
Truncation truncate_tokens(std::string_view text, std::size_t max_tokens);

/// Structured content of a templated description.
struct Characterization {
    InterferenceType intf_type = InterferenceType::None;
    std::size_t type_votes = 0;
    std::size_t neighbors = 0;
    int scenario = 1;
    std::optional<double> power;      // absent for a clean majority
    std::optional<double> bandwidth;
};

/// Majority type and scenario plus the weighted parameter estimate of the
/// prompt's context. Nullopt when the prompt has no context.
std::optional<Characterization> characterize(const Prompt& prompt);

/// Deterministic offline describer: a pure function of the prompt.
Description describe_templated(const Prompt& prompt);

struct RemoteEndpoint {
    std::string url;
    std::chrono::milliseconds timeout{30000};
    /// Environment variable holding a bearer token; unset or empty sends no auth header.
    std::string token_env = "DESCRIBER_TOKEN";
};

/// Single-turn call: POST prompt JSON, expect {"text": string}. Throws
/// TimeoutError, TransportError or MalformedResponseError. Over-long text is
/// truncated to max_tokens and flagged, not rejected.
Description describe_remote(const Prompt& prompt, const RemoteEndpoint& endpoint);

}  // namespace gnssrag
