#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gnssrag/vectorstore.hpp"

namespace gnssrag {

enum class DetailLevel : std::uint8_t { General, SignalInfoGeneral, SignalInfoDetailed, GeneralWithInterpretation };

inline constexpr std::array<DetailLevel, 4> kAllDetailLevels = {
    DetailLevel::General, DetailLevel::SignalInfoGeneral, DetailLevel::SignalInfoDetailed,
    DetailLevel::GeneralWithInterpretation};

/// snake_case names: general, signal_info_general, signal_info_detailed, general_with_interpretation.
std::string_view to_string(DetailLevel level);
DetailLevel parse_detail_level(std::string_view name);

struct QueryText {
    std::string text;
    DetailLevel detail_level = DetailLevel::General;
};

/// Sampling parameters forwarded to a remote describer. Ranges are checked on
/// construction: temperature in [0, 1], 1 < top_k < 100, 1 <= max_tokens <= 500.
class GenParams {
public:
    static constexpr double kDefaultTemperature = 0.7;
    static constexpr int kDefaultTopK = 40;
    static constexpr int kMaxTokensLimit = 500;

    GenParams() = default;
    GenParams(double temperature, int top_k, int max_tokens);

    double temperature() const { return temperature_; }
    int top_k() const { return top_k_; }
    int max_tokens() const { return max_tokens_; }

    bool operator==(const GenParams&) const = default;

private:
    double temperature_ = kDefaultTemperature;
    int top_k_ = kDefaultTopK;
    int max_tokens_ = kMaxTokensLimit;
};

nlohmann::json to_json(const GenParams& params);
/// Missing fields fall back to the defaults; out-of-range values throw ParameterError.
GenParams gen_params_from_json(const nlohmann::json& j);

struct Context {
    std::vector<SearchHit> hits;  // best first
    std::uint64_t query_id = 0;
    std::size_t k = 0;
    Metric metric = Metric::Cosine;
};

std::string image_ref_for(std::uint64_t snapshot_id);

struct Prompt {
    std::string system_instruction;
    std::optional<Context> context;  // structured neighbours, kept for the templated describer
    std::string context_block;       // rendered neighbours, empty without context
    std::string image_ref;
    std::string question;            // detail-level framing plus the user question
    DetailLevel detail_level = DetailLevel::General;
    GenParams params;
    std::string template_version;

    /// Full text sent to a language model.
    std::string render() const;
    /// {system, context, question, image_ref, params, detail_level, template_version}
    nlohmann::json to_json() const;
};

/// Named template texts with {placeholder} fields.
class TemplateSet {
public:
    /// Templates compiled in from templates/v1.
    static const TemplateSet& builtin();
    /// Reads the same file names from a directory (plus an optional VERSION file).
    static TemplateSet load(const std::string& directory);

    const std::string& get(std::string_view name) const;
    const std::string& version() const { return version_; }

    static const std::vector<std::string>& required_names();

private:
    std::map<std::string, std::string, std::less<>> texts_;
    std::string version_;
};

/// Replaces every {name} with vars[name] in one pass; substituted text is not
/// rescanned. Throws ParameterError for a placeholder without a value.
std::string render_template(std::string_view text, const std::map<std::string, std::string, std::less<>>& vars);

/// Labeled neighbour lines, one per hit, in hit order.
std::string render_context_block(const Context& context, const TemplateSet& templates = TemplateSet::builtin());

/// Instruction + image + question, no neighbour information.
Prompt assemble_task_instruction(std::string image_ref, const QueryText& query, const GenParams& params = {},
                                 const TemplateSet& templates = TemplateSet::builtin());

/// Searches the index for the query embedding; store errors propagate.
Context retrieve_context(const VectorIndex& index, const Embedding& query_embedding, const QueryText& query,
                         std::size_t k);
Context retrieve_context(const SharedIndex& index, const Embedding& query_embedding, const QueryText& query,
                         std::size_t k);

/// Instruction + rendered neighbours + image + question. Throws ParameterError
/// for an empty context.
Prompt assemble_in_context(const Context& context, std::string image_ref, const QueryText& query,
                           const GenParams& params = {}, const TemplateSet& templates = TemplateSet::builtin());

}  // namespace gnssrag
