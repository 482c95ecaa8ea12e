#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gnssrag/vectorstore.hpp"

namespace gnssrag {

inline constexpr std::size_t kDefaultNeighbors = 5;
/// Floor added to every similarity weight so zero-similarity neighbours still count.
inline constexpr double kWeightEpsilon = 1e-6;

/// Similarity of a hit: the score under Cosine, 1 - d^2 / 2 under L2
/// (equal to the cosine for unit vectors).
double hit_similarity(Metric metric, const SearchHit& hit);

struct ClassVote {
    InterferenceType intf_type = InterferenceType::None;
    std::string subjammer;
    std::map<std::string, std::size_t> votes;            // per interference type
    std::map<std::string, std::size_t> subjammer_votes;  // per subjammer label
};

/// Majority vote over best-first hits; a tie goes to the tied class whose
/// best-ranked member comes first. Throws ParameterError on empty input.
ClassVote vote(std::span<const SearchHit> hits);

/// Most frequent scenario, same tie rule as vote().
int majority_scenario(std::span<const SearchHit> hits);

struct ParameterEstimate {
    double power = 0.0;
    double bandwidth = 0.0;
    std::size_t neighbors_used = 0;
};

/// Similarity-weighted mean of the jammer parameters of non-clean hits,
/// weights max(s, 0) + 1e-6, clamped to the label ranges. Throws
/// NotEstimableError when every hit is clean.
ParameterEstimate weighted_estimate(std::span<const SearchHit> hits, Metric metric);

ClassVote knn_classify(const VectorIndex& index, std::span<const float> query, std::size_t k);
ParameterEstimate knn_regress(const VectorIndex& index, std::span<const float> query, std::size_t k);

struct Prediction {
    std::uint64_t id = 0;
    InterferenceType intf_type = InterferenceType::None;
    std::string subjammer;
    std::optional<double> power;      // absent when not estimable
    std::optional<double> bandwidth;  // absent when not estimable
    std::map<std::string, std::size_t> votes;
    std::vector<std::uint64_t> neighbor_ids;
};

Prediction predict(const std::vector<SearchHit>& hits, Metric metric, std::uint64_t id);
Prediction predict(const VectorIndex& index, std::span<const float> query, std::size_t k, std::uint64_t id);
nlohmann::json to_json(const Prediction& prediction);

/// Min-max normalisation of the regression targets to [0, 1].
double normalize_power(double power);
double normalize_bandwidth(double bandwidth);

/// One line of the prediction dump. Numeric fields are empty for clean items.
struct PredictionRow {
    std::uint64_t id = 0;
    std::string true_type, pred_type;
    std::string true_sub, pred_sub;
    std::optional<double> true_power, pred_power;
    std::optional<double> true_bw, pred_bw;

    bool operator==(const PredictionRow&) const = default;
};

struct Metrics {
    double type_accuracy = 0.0;       // percent
    double subjammer_accuracy = 0.0;  // percent
    double power_mse = 0.0;           // on normalised targets
    double bandwidth_mse = 0.0;       // on normalised targets
    std::size_t n = 0;
    std::size_t regression_n = 0;     // rows with a non-clean ground truth
    std::size_t k = 0;
    Metric metric = Metric::Cosine;
};

nlohmann::json to_json(const Metrics& metrics);

/// Scores prediction rows from any predictor. Regression rows without a
/// prediction are scored against the range midpoint.
Metrics score_predictions(std::span<const PredictionRow> rows);

void write_predictions_csv(std::span<const PredictionRow> rows, std::ostream& out);
/// Throws FormatError on a bad header or row.
std::vector<PredictionRow> read_predictions_csv(std::istream& in);

struct LabeledEmbedding {
    Embedding embedding;
    JammerSpec spec;
};

struct Evaluation {
    Metrics metrics;
    std::vector<PredictionRow> rows;
};

PredictionRow make_row(std::uint64_t id, const JammerSpec& truth, const Prediction& prediction);

/// Retrieval-protocol benchmark. Throws LeakageError if any test id is in the index.
Evaluation evaluate(const VectorIndex& index, std::span<const LabeledEmbedding> test, std::size_t k);

}  // namespace gnssrag
