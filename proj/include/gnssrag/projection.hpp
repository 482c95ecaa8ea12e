#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace gnssrag {

struct TsneParams {
    double perplexity = 30.0;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch_iter = 250;
    double learning_rate = 200.0;
    int iterations = 1000;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 250;
    double init_sigma = 1e-4;
    std::uint64_t seed = 0;

    /// Hard checks only; an over-large perplexity is lowered later with a warning.
    void validate() const;
};

nlohmann::json to_json(const TsneParams& params);

/// Largest perplexity usable for n points: (n - 1) / 3.
double max_perplexity(std::size_t n);

struct Calibration {
    std::size_t n = 0;
    double perplexity = 0.0;         // effective target
    std::vector<double> sigmas;      // per point, finite and positive
    std::vector<double> conditional; // n x n, row i holds p_{j|i}, zero diagonal
    std::vector<double> entropies;   // achieved Shannon entropy per row, bits
    std::vector<std::string> warnings;
};

/// Per-point Gaussian bandwidths whose conditional distributions have
/// entropy log2(perplexity). Rows of identical points come out uniform.
Calibration calibrate_perplexity(std::span<const double> sq_distances, std::size_t n, double perplexity);

/// p_ij = (p_{j|i} + p_{i|j}) / 2n.
std::vector<double> symmetrize(std::span<const double> conditional, std::size_t n);

struct ProjectedPoints {
    std::vector<double> coords;  // n x 2, row-major
    double initial_kl = 0.0;     // KL at the starting layout, without exaggeration
    double final_kl = 0.0;
    int iterations = 0;
    double perplexity = 0.0;     // effective value used
    std::vector<std::string> labels;
    std::vector<std::string> warnings;

    std::size_t size() const { return coords.size() / 2; }
};

/// Exact t-SNE of n points of dimension dim (row-major). Deterministic for a
/// fixed seed. Throws ParameterError for n < 5 or non-finite input and
/// NumericalError if the optimisation produces NaN.
ProjectedPoints tsne(std::span<const double> points, std::size_t n, std::size_t dim, const TsneParams& params,
                     std::vector<std::string> labels = {});

/// Rows "id,x,y,label".
void write_projection_csv(const ProjectedPoints& points, std::span<const std::uint64_t> ids, std::ostream& out);
nlohmann::json projection_report(const ProjectedPoints& points, const TsneParams& params, const std::string& note);
/// Static scatter plot coloured by label.
void write_projection_svg(const ProjectedPoints& points, std::ostream& out);

}  // namespace gnssrag
