#include "gnssrag/tasks.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "gnssrag/error.hpp"
#include "gnssrag/format.hpp"

namespace gnssrag {

namespace {

constexpr std::string_view kCsvHeader = "id,true_type,pred_type,true_sub,pred_sub,true_power,pred_power,true_bw,pred_bw";

// Majority over labels in best-first order; ties go to the label seen first.
template <typename Label>
Label majority(const std::vector<Label>& labels, std::map<Label, std::size_t>& counts) {
    for (const auto& l : labels) ++counts[l];
    std::size_t best = 0;
    for (const auto& [l, c] : counts) best = std::max(best, c);
    for (const auto& l : labels)
        if (counts[l] == best) return l;
    return labels.front();
}

std::string optional_number(const std::optional<double>& v) { return v ? format_shortest(*v) : std::string(); }

std::optional<double> parse_optional_number(const std::string& field, std::size_t line) {
    if (field.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw FormatError(line, "bad number '" + field + "' on CSV line " + std::to_string(line));
    return v;
}

}  // namespace

double hit_similarity(Metric metric, const SearchHit& hit) {
    if (metric == Metric::Cosine) return hit.score;
    return 1.0 - hit.score * hit.score / 2.0;
}

ClassVote vote(std::span<const SearchHit> hits) {
    if (hits.empty()) throw ParameterError("hits", "cannot vote over an empty neighbourhood");
    std::vector<std::string> types, subs;
    for (const auto& h : hits) {
        types.emplace_back(to_string(h.metadata.intf_type));
        subs.push_back(h.metadata.subjammer());
    }
    ClassVote out;
    out.intf_type = parse_interference_type(majority(types, out.votes));
    out.subjammer = majority(subs, out.subjammer_votes);
    return out;
}

int majority_scenario(std::span<const SearchHit> hits) {
    if (hits.empty()) throw ParameterError("hits", "cannot vote over an empty neighbourhood");
    std::vector<int> scenarios;
    for (const auto& h : hits) scenarios.push_back(h.metadata.scenario);
    std::map<int, std::size_t> counts;
    return majority(scenarios, counts);
}

ParameterEstimate weighted_estimate(std::span<const SearchHit> hits, Metric metric) {
    double wsum = 0.0, psum = 0.0, bsum = 0.0;
    std::size_t used = 0;
    for (const auto& h : hits) {
        if (h.metadata.intf_type == InterferenceType::None) continue;
        const double w = std::max(hit_similarity(metric, h), 0.0) + kWeightEpsilon;
        wsum += w;
        psum += w * h.metadata.power;
        bsum += w * h.metadata.bandwidth;
        ++used;
    }
    if (used == 0) throw NotEstimableError("every neighbour is interference-free; power and bandwidth are undefined");
    return {std::clamp(psum / wsum, kMinPower, kMaxPower), std::clamp(bsum / wsum, kMinBandwidth, kMaxBandwidth), used};
}

ClassVote knn_classify(const VectorIndex& index, std::span<const float> query, std::size_t k) {
    return vote(index.search(query, k));
}

ParameterEstimate knn_regress(const VectorIndex& index, std::span<const float> query, std::size_t k) {
    return weighted_estimate(index.search(query, k), index.metric());
}

Prediction predict(const std::vector<SearchHit>& hits, Metric metric, std::uint64_t id) {
    const ClassVote cls = vote(hits);
    Prediction p;
    p.id = id;
    p.intf_type = cls.intf_type;
    p.subjammer = cls.subjammer;
    p.votes = cls.votes;
    for (const auto& h : hits) p.neighbor_ids.push_back(h.id);
    try {
        const auto est = weighted_estimate(hits, metric);
        p.power = est.power;
        p.bandwidth = est.bandwidth;
    } catch (const NotEstimableError&) {
    }
    return p;
}

Prediction predict(const VectorIndex& index, std::span<const float> query, std::size_t k, std::uint64_t id) {
    return predict(index.search(query, k), index.metric(), id);
}

nlohmann::json to_json(const Prediction& p) {
    nlohmann::json j{{"id", p.id},
                     {"intf_type", std::string(to_string(p.intf_type))},
                     {"subjammer", p.subjammer},
                     {"votes", p.votes},
                     {"neighbor_ids", p.neighbor_ids}};
    j["power"] = p.power ? nlohmann::json(*p.power) : nlohmann::json(nullptr);
    j["bandwidth"] = p.bandwidth ? nlohmann::json(*p.bandwidth) : nlohmann::json(nullptr);
    return j;
}

double normalize_power(double power) { return (power - kMinPower) / (kMaxPower - kMinPower); }
double normalize_bandwidth(double bandwidth) {
    return (bandwidth - kMinBandwidth) / (kMaxBandwidth - kMinBandwidth);
}

nlohmann::json to_json(const Metrics& m) {
    return {{"type_accuracy", m.type_accuracy}, {"subjammer_accuracy", m.subjammer_accuracy},
            {"power_mse", m.power_mse},         {"bandwidth_mse", m.bandwidth_mse},
            {"n", m.n},                         {"regression_n", m.regression_n},
            {"k", m.k},                         {"metric", std::string(to_string(m.metric))},
            {"normalization", "min-max: power (p+10)/20, bandwidth (b-0.1)/59.9"}};
}

Metrics score_predictions(std::span<const PredictionRow> rows) {
    Metrics m;
    m.n = rows.size();
    std::size_t type_ok = 0, sub_ok = 0;
    double power_se = 0.0, bw_se = 0.0;
    for (const auto& r : rows) {
        type_ok += r.true_type == r.pred_type;
        sub_ok += r.true_sub == r.pred_sub;
        if (!r.true_power || !r.true_bw) continue;
        ++m.regression_n;
        const double dp = normalize_power(r.pred_power.value_or(0.0)) - normalize_power(*r.true_power);
        const double db =
            normalize_bandwidth(r.pred_bw.value_or((kMinBandwidth + kMaxBandwidth) / 2.0)) - normalize_bandwidth(*r.true_bw);
        power_se += dp * dp;
        bw_se += db * db;
    }
    if (m.n > 0) {
        m.type_accuracy = 100.0 * static_cast<double>(type_ok) / static_cast<double>(m.n);
        m.subjammer_accuracy = 100.0 * static_cast<double>(sub_ok) / static_cast<double>(m.n);
    }
    if (m.regression_n > 0) {
        m.power_mse = power_se / static_cast<double>(m.regression_n);
        m.bandwidth_mse = bw_se / static_cast<double>(m.regression_n);
    }
    return m;
}

void write_predictions_csv(std::span<const PredictionRow> rows, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows)
        out << r.id << ',' << r.true_type << ',' << r.pred_type << ',' << r.true_sub << ',' << r.pred_sub << ','
            << optional_number(r.true_power) << ',' << optional_number(r.pred_power) << ','
            << optional_number(r.true_bw) << ',' << optional_number(r.pred_bw) << '\n';
}

std::vector<PredictionRow> read_predictions_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw FormatError(0, "prediction CSV header mismatch");
    std::vector<PredictionRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 9) throw FormatError(line_no, "expected 9 CSV fields on line " + std::to_string(line_no));
        PredictionRow r;
        const auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), r.id);
        if (ec != std::errc() || ptr != f[0].data() + f[0].size())
            throw FormatError(line_no, "bad id on CSV line " + std::to_string(line_no));
        r.true_type = f[1];
        r.pred_type = f[2];
        r.true_sub = f[3];
        r.pred_sub = f[4];
        r.true_power = parse_optional_number(f[5], line_no);
        r.pred_power = parse_optional_number(f[6], line_no);
        r.true_bw = parse_optional_number(f[7], line_no);
        r.pred_bw = parse_optional_number(f[8], line_no);
        rows.push_back(std::move(r));
    }
    return rows;
}

PredictionRow make_row(std::uint64_t id, const JammerSpec& truth, const Prediction& prediction) {
    PredictionRow r;
    r.id = id;
    r.true_type = std::string(to_string(truth.intf_type));
    r.pred_type = std::string(to_string(prediction.intf_type));
    r.true_sub = truth.subjammer();
    r.pred_sub = prediction.subjammer;
    if (truth.intf_type != InterferenceType::None) {
        r.true_power = truth.power;
        r.true_bw = truth.bandwidth;
        r.pred_power = prediction.power;
        r.pred_bw = prediction.bandwidth;
    }
    return r;
}

Evaluation evaluate(const VectorIndex& index, std::span<const LabeledEmbedding> test, std::size_t k) {
    for (const auto& item : test)
        if (index.find(item.embedding.snapshot_id))
            throw LeakageError("test snapshot " + std::to_string(item.embedding.snapshot_id) + " is also in the index");

    Evaluation eval;
    eval.rows.resize(test.size());
    std::mutex error_mutex;
    std::exception_ptr failure;
    const auto count = static_cast<std::ptrdiff_t>(test.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        const auto& item = test[static_cast<std::size_t>(i)];
        try {
            const auto hits = index.search(item.embedding.vector, k, ScanMode::Serial);
            eval.rows[static_cast<std::size_t>(i)] =
                make_row(item.embedding.snapshot_id, item.spec, predict(hits, index.metric(), item.embedding.snapshot_id));
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    eval.metrics = score_predictions(eval.rows);
    eval.metrics.k = k;
    eval.metrics.metric = index.metric();
    return eval;
}

}  // namespace gnssrag
