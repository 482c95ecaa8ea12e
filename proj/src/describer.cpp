#include "gnssrag/describer.hpp"

#include <cctype>
#include <cstdlib>
#include <httplib.h>

#include "gnssrag/error.hpp"
#include "gnssrag/format.hpp"
#include "gnssrag/http_url.hpp"
#include "gnssrag/tasks.hpp"

namespace gnssrag {

namespace {

constexpr std::string_view kGeneralParagraph =
    "The snapshot is a time-frequency magnitude map of 1024 channels over 34 time bins. Without reference "
    "information the snapshot can only be screened for generic anomalies: narrow horizontal lines indicate "
    "continuous tones, diagonal traces indicate frequency sweeps, vertical stripes indicate pulsed emissions and "
    "broad elevated regions indicate wideband noise. Any such structure above the noise floor suggests "
    "interference that should be examined further.";

std::string_view type_explanation(InterferenceType type) {
    switch (type) {
        case InterferenceType::Chirp:
            return "A chirp is characterized by a linear frequency sweep: its center frequency increases or decreases "
                   "linearly over time.";
        case InterferenceType::FreqHopper:
            return "A frequency hopper dwells on one narrow band for a few time bins before jumping to another.";
        case InterferenceType::Modulated:
            return "A modulated jammer shows a strong carrier with symmetric sidebands.";
        case InterferenceType::Multitone:
            return "A multitone jammer places several constant narrowband tones inside its band.";
        case InterferenceType::Pulsed:
            return "A pulsed jammer switches on and off over time and spreads energy across the spectrum while on.";
        case InterferenceType::Noise:
            return "A noise jammer raises the power level evenly across its whole band and all time bins.";
        case InterferenceType::None: break;
    }
    return "";
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string_view to_string(DescriberBackend backend) {
    return backend == DescriberBackend::Remote ? "Remote" : "Templated";
}

std::size_t count_tokens(std::string_view text) { return truncate_tokens(text, SIZE_MAX).token_count; }

Truncation truncate_tokens(std::string_view text, std::size_t max_tokens) {
    std::size_t count = 0;
    std::size_t last_end = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        if (i == text.size()) break;
        if (count == max_tokens) return {std::string(text.substr(0, last_end)), count, true};
        ++count;
        while (i < text.size() && !is_space(text[i])) ++i;
        last_end = i;
    }
    return {std::string(text), count, false};
}

std::optional<Characterization> characterize(const Prompt& prompt) {
    if (!prompt.context || prompt.context->hits.empty()) return std::nullopt;
    const auto& hits = prompt.context->hits;
    const ClassVote cls = vote(hits);
    Characterization c;
    c.intf_type = cls.intf_type;
    c.type_votes = cls.votes.at(std::string(to_string(cls.intf_type)));
    c.neighbors = hits.size();
    c.scenario = majority_scenario(hits);
    if (cls.intf_type != InterferenceType::None) {
        const auto est = weighted_estimate(hits, prompt.context->metric);
        c.power = est.power;
        c.bandwidth = est.bandwidth;
    }
    return c;
}

Description describe_templated(const Prompt& prompt) {
    std::string text;
    if (const auto c = characterize(prompt)) {
        const std::string share = std::to_string(c->type_votes) + " of " + std::to_string(c->neighbors);
        if (c->intf_type == InterferenceType::None) {
            text = "The snapshot appears to be free of interference. " + share +
                   " retrieved reference snapshots are interference-free; the closest match suggests multipath "
                   "scenario " + std::to_string(c->scenario) + ".";
        } else {
            text = "The signal appears to be a " + std::string(display_name(c->intf_type)) + " interference. " + share +
                   " retrieved reference snapshots share this type. " + std::string(type_explanation(c->intf_type)) +
                   " Estimated characteristics: bandwidth=" + format_fixed(*c->bandwidth, 2) +
                   " power=" + format_fixed(*c->power, 2) + " scenario=" + std::to_string(c->scenario) + ".";
        }
    } else {
        text = kGeneralParagraph;
    }
    const auto cut = truncate_tokens(text, static_cast<std::size_t>(prompt.params.max_tokens()));
    return {cut.text, DescriberBackend::Templated, cut.token_count, 0.0, cut.truncated};
}

Description describe_remote(const Prompt& prompt, const RemoteEndpoint& endpoint) {
    const auto url = parse_http_url(endpoint.url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(endpoint.timeout);
    client.set_read_timeout(endpoint.timeout);
    client.set_write_timeout(endpoint.timeout);
    httplib::Headers headers;
    if (const char* token = std::getenv(endpoint.token_env.c_str()); token && *token)
        headers.emplace("Authorization", std::string("Bearer ") + token);

    nlohmann::json body = prompt.to_json();
    body["rendered"] = prompt.render();
    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(url.path, headers, body.dump(), "application/json");
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (!res) {
        if (res.error() == httplib::Error::ConnectionTimeout ||
            (res.error() == httplib::Error::Read && elapsed >= endpoint.timeout))
            throw TimeoutError("describer at " + endpoint.url + " timed out");
        throw TransportError("describer at " + endpoint.url + " unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200)
        throw TransportError("describer at " + endpoint.url + " returned HTTP " + std::to_string(res->status));

    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
        throw MalformedResponseError("describer response is not valid JSON");
    }
    if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string())
        throw MalformedResponseError("describer response lacks a string 'text' field");
    const auto text = reply["text"].get<std::string>();
    if (count_tokens(text) == 0) throw MalformedResponseError("describer returned empty text");

    const auto cut = truncate_tokens(text, static_cast<std::size_t>(prompt.params.max_tokens()));
    return {cut.text, DescriberBackend::Remote, cut.token_count,
            std::chrono::duration<double, std::milli>(elapsed).count(), cut.truncated};
}

}  // namespace gnssrag
