#include "gnssrag/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gnssrag/dataset.hpp"
#include "gnssrag/error.hpp"

namespace gnssrag {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(stage, e);
    }
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ParameterError(key, "expected an integer, got '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ParameterError(key, "expected a number, got '" + value + "'");
    }
}

}  // namespace

std::map<std::string, std::string> parse_config_text(std::string_view text) {
    std::map<std::string, std::string> values;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty() || t.front() == '[') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParameterError("config", "line " + std::to_string(line_no) + " is not `key = value`");
        std::string key = trim(std::string_view(t).substr(0, eq));
        std::string value = trim(std::string_view(t).substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        values[key] = value;
    }
    return values;
}

void PipelineConfig::apply(const std::map<std::string, std::string>& values) {
    double temperature = params.temperature();
    int top_k = params.top_k();
    int max_tokens = params.max_tokens();
    for (const auto& [key, value] : values) {
        if (key == "dataset") dataset_dir = value;
        else if (key == "index") index_path = value;
        else if (key == "embedder") {
            if (value == "baseline") embedder = EmbedderKind::Baseline;
            else if (value == "external") embedder = EmbedderKind::External;
            else throw ParameterError(key, "expected baseline or external");
        } else if (key == "encoder_url") encoder.url = value;
        else if (key == "encoder_dim") encoder.declared_dim = static_cast<std::size_t>(parse_long(key, value));
        else if (key == "encoder_timeout_ms") encoder.timeout = std::chrono::milliseconds(parse_long(key, value));
        else if (key == "describer") {
            if (value == "templated") describer = DescriberKind::Templated;
            else if (value == "remote") describer = DescriberKind::Remote;
            else throw ParameterError(key, "expected templated or remote");
        } else if (key == "describer_url") describer_endpoint.url = value;
        else if (key == "describer_timeout_ms") describer_endpoint.timeout = std::chrono::milliseconds(parse_long(key, value));
        else if (key == "temperature") temperature = parse_double(key, value);
        else if (key == "top_k") top_k = static_cast<int>(parse_long(key, value));
        else if (key == "max_tokens") max_tokens = static_cast<int>(parse_long(key, value));
        else if (key == "k") {
            const long v = parse_long(key, value);
            if (v < 1) throw ParameterError(key, "must be at least 1");
            k = static_cast<std::size_t>(v);
        } else throw ParameterError(key, "unknown configuration key");
    }
    params = GenParams(temperature, top_k, max_tokens);
}

void PipelineConfig::validate() const {
    if (index_path.empty()) throw ParameterError("index", "no index path configured");
    if (!fs::exists(index_path)) throw IoError("index file '" + index_path.string() + "' does not exist");
    if (!dataset_dir.empty() && !fs::is_directory(dataset_dir))
        throw IoError("dataset directory '" + dataset_dir.string() + "' does not exist");
    if (embedder == EmbedderKind::External && encoder.url.empty())
        throw ParameterError("encoder_url", "required for the external embedder");
    if (describer == DescriberKind::Remote && describer_endpoint.url.empty())
        throw ParameterError("describer_url", "required for the remote describer");
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    PipelineConfig config;
    config.apply(parse_config_text(ss.str()));
    return config;
}

std::optional<fs::path> resolve_config_path(const std::optional<fs::path>& explicit_path) {
    if (explicit_path) return explicit_path;
    if (const char* env = std::getenv("GNSSRAG_CONFIG"); env && *env) return fs::path(env);
    return std::nullopt;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ParameterDomain:
        case ErrorKind::Contract:
            return 1;
        case ErrorKind::Io:
        case ErrorKind::Format:
        case ErrorKind::State:
        case ErrorKind::DataIntegrity:
        case ErrorKind::Uniqueness:
        case ErrorKind::Leakage:
            return 2;
        case ErrorKind::Transport:
        case ErrorKind::Timeout:
        case ErrorKind::MalformedResponse:
        case ErrorKind::NotEstimable:
        case ErrorKind::NumericalFailure:
            return 3;
    }
    return 3;
}

nlohmann::json to_json(const SearchHit& hit) {
    return {{"id", hit.id}, {"score", hit.score}, {"metadata", hit.metadata}};
}

nlohmann::json hits_to_json(std::span<const SearchHit> hits) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& h : hits) arr.push_back(to_json(h));
    return arr;
}

nlohmann::json to_json(const QueryResult& r, bool include_latency) {
    nlohmann::json j{{"description", r.description.text},
                     {"backend", std::string(to_string(r.description.backend))},
                     {"token_count", r.description.token_count},
                     {"truncated", r.description.truncated},
                     {"context", hits_to_json(r.context.hits)},
                     {"prompt", r.prompt.to_json()}};
    if (include_latency)
        j["latency_ms"] = {{"embed", r.latency.embed_ms},       {"retrieve", r.latency.retrieve_ms},
                           {"assemble", r.latency.assemble_ms}, {"describe", r.latency.describe_ms},
                           {"total", r.latency.total_ms}};
    return j;
}

Pipeline::Pipeline(PipelineConfig config, VectorIndex index)
    : config_(std::move(config)), index_(std::make_shared<SharedIndex>(std::move(index))) {}

Pipeline Pipeline::open(const PipelineConfig& config) {
    return run_stage("load", [&] {
        config.validate();
        return Pipeline(config, load_index(config.index_path));
    });
}

Embedding Pipeline::embed(const Snapshot& snap) const {
    return run_stage("embed", [&] {
        if (config_.embedder == EmbedderKind::External) return embed_external(snap, config_.encoder);
        return embed_baseline(snap);
    });
}

QueryResult Pipeline::query(const Snapshot& snap, const QueryText& question, std::size_t k,
                            const GenParams& params) const {
    QueryResult r;
    const auto start = Clock::now();
    auto t = Clock::now();
    const Embedding e = embed(snap);
    r.latency.embed_ms = ms_since(t);

    t = Clock::now();
    r.context = run_stage("retrieve", [&] { return retrieve_context(*index_, e, question, k); });
    r.latency.retrieve_ms = ms_since(t);

    t = Clock::now();
    r.prompt = run_stage("assemble", [&] { return assemble_in_context(r.context, image_ref_for(snap.id), question, params); });
    r.latency.assemble_ms = ms_since(t);

    t = Clock::now();
    r.description = run_stage("describe", [&] {
        if (config_.describer == DescriberKind::Remote) return describe_remote(r.prompt, config_.describer_endpoint);
        return describe_templated(r.prompt);
    });
    r.latency.describe_ms = ms_since(t);
    r.description.latency_ms = r.latency.describe_ms;
    r.latency.total_ms = ms_since(start);
    return r;
}

Prediction Pipeline::classify(const Snapshot& snap, std::size_t k) const {
    const Embedding e = embed(snap);
    return classify(e.vector, k, snap.id);
}

Prediction Pipeline::classify(std::span<const float> vector, std::size_t k, std::uint64_t id) const {
    return run_stage("classify", [&] { return predict(index_->search(vector, k), index_->metric(), id); });
}

Snapshot Pipeline::lookup_snapshot(std::uint64_t id) const {
    return run_stage("load", [&] {
        if (config_.dataset_dir.empty()) throw IoError("no dataset directory configured to resolve snapshot ids");
        const fs::path path = config_.dataset_dir / snapshot_file_name(id);
        if (!fs::exists(path)) throw IoError("snapshot " + std::to_string(id) + " not found in dataset");
        return read_snapshot(path);
    });
}

}  // namespace gnssrag
