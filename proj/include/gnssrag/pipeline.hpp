#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "gnssrag/describer.hpp"
#include "gnssrag/error.hpp"
#include "gnssrag/embedder.hpp"
#include "gnssrag/promptkit.hpp"
#include "gnssrag/tasks.hpp"
#include "gnssrag/vectorstore.hpp"

namespace gnssrag {

enum class EmbedderKind { Baseline, External };
enum class DescriberKind { Templated, Remote };

struct PipelineConfig {
    std::filesystem::path dataset_dir;  // optional: resolves snapshot ids
    std::filesystem::path index_path;
    EmbedderKind embedder = EmbedderKind::Baseline;
    EncoderHandle encoder;
    DescriberKind describer = DescriberKind::Templated;
    RemoteEndpoint describer_endpoint;
    GenParams params;
    std::size_t k = kDefaultNeighbors;

    /// Applies `key = value` pairs (see parse_config_text). Unknown keys throw ParameterError.
    void apply(const std::map<std::string, std::string>& values);
    /// Checks that referenced paths exist and each selected backend is configured.
    void validate() const;
};

/// Key/value text: `key = value` lines, `#` comments, optional quotes,
/// `[section]` headers ignored.
std::map<std::string, std::string> parse_config_text(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);
/// Explicit path if given, else $GNSSRAG_CONFIG, else none.
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& explicit_path);

/// Error raised by a pipeline stage; carries the stage name and the original kind.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause)
        : Error(cause.kind(), stage + ": " + cause.what()), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// Process exit code for an error kind: 1 usage, 2 IO/load, 3 backend.
int exit_code_for(ErrorKind kind);

struct StageTimings {
    double embed_ms = 0.0;
    double retrieve_ms = 0.0;
    double assemble_ms = 0.0;
    double describe_ms = 0.0;
    double total_ms = 0.0;
};

struct QueryResult {
    Description description;
    Context context;
    Prompt prompt;
    StageTimings latency;
};

nlohmann::json to_json(const SearchHit& hit);
nlohmann::json hits_to_json(std::span<const SearchHit> hits);
/// Deterministic under the templated describer when include_latency is false.
nlohmann::json to_json(const QueryResult& result, bool include_latency);

/// Embed -> retrieve -> assemble -> describe, shared by the CLI and the HTTP service.
class Pipeline {
public:
    Pipeline(PipelineConfig config, VectorIndex index);
    /// Loads the index named by the config; failures raise StageError("load").
    static Pipeline open(const PipelineConfig& config);

    Embedding embed(const Snapshot& snap) const;
    QueryResult query(const Snapshot& snap, const QueryText& question, std::size_t k, const GenParams& params) const;
    Prediction classify(const Snapshot& snap, std::size_t k) const;
    Prediction classify(std::span<const float> vector, std::size_t k, std::uint64_t id = 0) const;

    /// Reads snapshot <dataset_dir>/snap_<id>.gsnp. An absent file raises StageError("load") of kind Io.
    Snapshot lookup_snapshot(std::uint64_t id) const;

    const PipelineConfig& config() const { return config_; }
    const SharedIndex& index() const { return *index_; }

private:
    PipelineConfig config_;
    std::shared_ptr<SharedIndex> index_;
};

}  // namespace gnssrag
