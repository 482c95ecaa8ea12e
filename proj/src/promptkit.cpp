#include "gnssrag/promptkit.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gnssrag/error.hpp"
#include "gnssrag/format.hpp"
#include "templates_embedded.hpp"

namespace gnssrag {

namespace {

using Vars = std::map<std::string, std::string, std::less<>>;

std::string_view level_template(DetailLevel level) {
    switch (level) {
        case DetailLevel::General: return "general";
        case DetailLevel::SignalInfoGeneral: return "signal_info_general";
        case DetailLevel::SignalInfoDetailed: return "signal_info_detailed";
        case DetailLevel::GeneralWithInterpretation: return "general_interpretation";
    }
    return "general";
}

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string class_names() {
    std::string out;
    for (auto t : kAllTypes) {
        if (!out.empty()) out += ", ";
        out += to_string(t);
    }
    return out;
}

std::string render_system(const TemplateSet& templates) {
    return render_template(templates.get("system"),
                           {{"channels", std::to_string(kChannels)}, {"time_bins", std::to_string(kTimeBins)}});
}

std::string render_question(const TemplateSet& templates, const QueryText& query) {
    if (is_blank(query.text)) throw ParameterError("question", "must not be empty");
    const Vars vars{{"question", query.text},
                    {"class_names", class_names()},
                    {"bandwidth_min", format_shortest(kMinBandwidth)},
                    {"bandwidth_max", format_shortest(kMaxBandwidth)},
                    {"power_min", format_shortest(kMinPower)},
                    {"power_max", format_shortest(kMaxPower)},
                    {"scenario_min", std::to_string(kMinScenario)},
                    {"scenario_max", std::to_string(kMaxScenario)}};
    return render_template(templates.get(level_template(query.detail_level)), vars);
}

void require_image_ref(const std::string& image_ref) {
    if (is_blank(image_ref)) throw ParameterError("image_ref", "must not be empty");
}

}  // namespace

std::string_view to_string(DetailLevel level) {
    switch (level) {
        case DetailLevel::General: return "general";
        case DetailLevel::SignalInfoGeneral: return "signal_info_general";
        case DetailLevel::SignalInfoDetailed: return "signal_info_detailed";
        case DetailLevel::GeneralWithInterpretation: return "general_with_interpretation";
    }
    return "general";
}

DetailLevel parse_detail_level(std::string_view name) {
    for (auto l : kAllDetailLevels)
        if (to_string(l) == name) return l;
    throw ParameterError("detail_level", "unknown detail level '" + std::string(name) + "'");
}

GenParams::GenParams(double temperature, int top_k, int max_tokens)
    : temperature_(temperature), top_k_(top_k), max_tokens_(max_tokens) {
    if (!(temperature >= 0.0 && temperature <= 1.0))
        throw ParameterError("temperature", "must be in [0, 1], got " + format_shortest(temperature));
    if (top_k <= 1 || top_k >= 100) throw ParameterError("top_k", "must satisfy 1 < top_k < 100, got " + std::to_string(top_k));
    if (max_tokens < 1 || max_tokens > kMaxTokensLimit)
        throw ParameterError("max_tokens", "must be in [1, 500], got " + std::to_string(max_tokens));
}

nlohmann::json to_json(const GenParams& p) {
    return {{"temperature", p.temperature()}, {"top_k", p.top_k()}, {"max_tokens", p.max_tokens()}};
}

GenParams gen_params_from_json(const nlohmann::json& j) {
    if (j.is_null()) return {};
    if (!j.is_object()) throw ParameterError("params", "expected an object");
    auto number = [&](const char* key, double fallback) {
        if (!j.contains(key)) return fallback;
        if (!j[key].is_number()) throw ParameterError(std::string("params/") + key, "expected a number");
        return j[key].get<double>();
    };
    auto integer = [&](const char* key, int fallback) {
        if (!j.contains(key)) return fallback;
        if (!j[key].is_number_integer()) throw ParameterError(std::string("params/") + key, "expected an integer");
        return j[key].get<int>();
    };
    return GenParams(number("temperature", GenParams::kDefaultTemperature), integer("top_k", GenParams::kDefaultTopK),
                     integer("max_tokens", GenParams::kMaxTokensLimit));
}

std::string image_ref_for(std::uint64_t snapshot_id) { return "snapshot:" + std::to_string(snapshot_id); }

std::string Prompt::render() const {
    std::string out = system_instruction + "\n\n";
    if (!context_block.empty()) out += context_block + "\n\n";
    out += "<image: " + image_ref + ">\n";
    out += question + "\n";
    return out;
}

nlohmann::json Prompt::to_json() const {
    return {{"system", system_instruction},
            {"context", context_block.empty() ? nlohmann::json(nullptr) : nlohmann::json(context_block)},
            {"question", question},
            {"image_ref", image_ref},
            {"params", gnssrag::to_json(params)},
            {"detail_level", std::string(to_string(detail_level))},
            {"template_version", template_version}};
}

const std::vector<std::string>& TemplateSet::required_names() {
    static const std::vector<std::string> names{"system",
                                                "context",
                                                "neighbor_line",
                                                "general",
                                                "signal_info_general",
                                                "signal_info_detailed",
                                                "general_interpretation"};
    return names;
}

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet set = [] {
        TemplateSet s;
        for (const auto& [name, text] : detail::embedded_templates()) {
            if (name == "VERSION")
                s.version_ = text.substr(0, text.find_first_of("\r\n"));
            else
                s.texts_[name] = text;
        }
        return s;
    }();
    return set;
}

TemplateSet TemplateSet::load(const std::string& directory) {
    namespace fs = std::filesystem;
    TemplateSet s;
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw IoError("cannot read template '" + p.string() + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    for (const auto& name : required_names()) s.texts_[name] = slurp(fs::path(directory) / (name + ".txt"));
    const fs::path version = fs::path(directory) / "VERSION";
    if (fs::exists(version)) {
        const auto text = slurp(version);
        s.version_ = text.substr(0, text.find_first_of("\r\n"));
    } else {
        s.version_ = fs::path(directory).filename().string();
    }
    return s;
}

const std::string& TemplateSet::get(std::string_view name) const {
    auto it = texts_.find(name);
    if (it == texts_.end()) throw ParameterError("template", "no template named '" + std::string(name) + "'");
    return it->second;
}

std::string render_template(std::string_view text, const Vars& vars) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find('{', pos);
        if (open == std::string_view::npos) {
            out.append(text.substr(pos));
            break;
        }
        const auto close = text.find('}', open);
        if (close == std::string_view::npos) throw ParameterError("template", "unterminated placeholder");
        out.append(text.substr(pos, open - pos));
        const auto name = text.substr(open + 1, close - open - 1);
        auto it = vars.find(name);
        if (it == vars.end()) throw ParameterError("template", "no value for placeholder {" + std::string(name) + "}");
        out.append(it->second);
        pos = close + 1;
    }
    return out;
}

std::string render_context_block(const Context& context, const TemplateSet& templates) {
    const bool cosine = context.metric == Metric::Cosine;
    std::string lines;
    for (std::size_t i = 0; i < context.hits.size(); ++i) {
        const auto& h = context.hits[i];
        const bool clean = h.metadata.intf_type == InterferenceType::None;
        if (i > 0) lines += "\n";
        lines += render_template(templates.get("neighbor_line"),
                                 {{"rank", std::to_string(i + 1)},
                                  {"type", std::string(to_string(h.metadata.intf_type))},
                                  {"bandwidth", clean ? "n/a" : format_shortest(h.metadata.bandwidth)},
                                  {"power", clean ? "n/a" : format_shortest(h.metadata.power)},
                                  {"scenario", std::to_string(h.metadata.scenario)},
                                  {"score_name", cosine ? "similarity" : "distance"},
                                  {"score", format_fixed(h.score, 4)}});
    }
    return render_template(templates.get("context"),
                           {{"k", std::to_string(context.k)},
                            {"metric", std::string(to_string(context.metric))},
                            {"neighbors", lines}});
}

Prompt assemble_task_instruction(std::string image_ref, const QueryText& query, const GenParams& params,
                                 const TemplateSet& templates) {
    require_image_ref(image_ref);
    Prompt p;
    p.question = render_question(templates, query);
    p.system_instruction = render_system(templates);
    p.image_ref = std::move(image_ref);
    p.detail_level = query.detail_level;
    p.params = params;
    p.template_version = templates.version();
    return p;
}

Context retrieve_context(const VectorIndex& index, const Embedding& query_embedding, const QueryText&,
                         std::size_t k) {
    return {index.search(query_embedding.vector, k), query_embedding.snapshot_id, k, index.metric()};
}

Context retrieve_context(const SharedIndex& index, const Embedding& query_embedding, const QueryText&,
                         std::size_t k) {
    return {index.search(query_embedding.vector, k), query_embedding.snapshot_id, k, index.metric()};
}

Prompt assemble_in_context(const Context& context, std::string image_ref, const QueryText& query,
                           const GenParams& params, const TemplateSet& templates) {
    if (context.hits.empty())
        throw ParameterError("context", "no retrieved neighbours; use assemble_task_instruction for context-free prompts");
    Prompt p = assemble_task_instruction(std::move(image_ref), query, params, templates);
    p.context = context;
    p.context_block = render_context_block(context, templates);
    return p;
}

}  // namespace gnssrag
