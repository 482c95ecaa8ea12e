#include "gnssrag/projection.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>

#include "gnssrag/error.hpp"
#include "gnssrag/format.hpp"
#include "gnssrag/kernels.hpp"
#include "gnssrag/rng.hpp"

namespace gnssrag {

namespace {

constexpr int kMaxBisection = 500;
constexpr double kEntropyTolerance = 1e-10;


// Fills row with exp(-beta * (d - d_min)) normalised; returns entropy in bits.
double evaluate_row(std::span<const double> d, std::size_t i, double d_min, double beta, std::span<double> row) {
    double sum = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (j == i) {
            row[j] = 0.0;
            continue;
        }
        const double shifted = d[j] - d_min;
        const double v = std::exp(-beta * shifted);
        row[j] = v;
        sum += v;
        weighted += v * shifted;
    }
    for (auto& v : row) v /= sum;
    return (std::log(sum) + beta * weighted / sum) / std::numbers::ln2;
}

}  // namespace

void TsneParams::validate() const {
    if (!(perplexity >= 2.0)) throw ParameterError("perplexity", "must be at least 2");
    if (!(initial_momentum >= 0.0 && initial_momentum < 1.0)) throw ParameterError("initial_momentum", "must be in [0, 1)");
    if (!(final_momentum >= 0.0 && final_momentum < 1.0)) throw ParameterError("final_momentum", "must be in [0, 1)");
    if (!(learning_rate > 0.0)) throw ParameterError("learning_rate", "must be positive");
    if (exaggeration_iters < 0) throw ParameterError("exaggeration_iters", "must be non-negative");
    if (iterations <= exaggeration_iters) throw ParameterError("iterations", "must exceed exaggeration_iters");
    if (momentum_switch_iter < 0) throw ParameterError("momentum_switch_iter", "must be non-negative");
    if (!(early_exaggeration >= 1.0)) throw ParameterError("early_exaggeration", "must be at least 1");
    if (!(init_sigma > 0.0)) throw ParameterError("init_sigma", "must be positive");
}

nlohmann::json to_json(const TsneParams& p) {
    return {{"perplexity", p.perplexity},
            {"initial_momentum", p.initial_momentum},
            {"final_momentum", p.final_momentum},
            {"momentum_switch_iter", p.momentum_switch_iter},
            {"learning_rate", p.learning_rate},
            {"iterations", p.iterations},
            {"early_exaggeration", p.early_exaggeration},
            {"exaggeration_iters", p.exaggeration_iters},
            {"init_sigma", p.init_sigma},
            {"seed", p.seed}};
}

double max_perplexity(std::size_t n) { return (static_cast<double>(n) - 1.0) / 3.0; }

Calibration calibrate_perplexity(std::span<const double> sq_distances, std::size_t n, double perplexity) {
    if (n < 2) throw ParameterError("n", "calibration needs at least 2 points");
    if (sq_distances.size() != n * n) throw DimensionError(n * n, sq_distances.size());
    if (!(perplexity > 0.0)) throw ParameterError("perplexity", "must be positive");

    Calibration cal;
    cal.n = n;
    cal.perplexity = perplexity;
    if (perplexity > max_perplexity(n)) {
        cal.perplexity = std::max(max_perplexity(n), 1.0);
        cal.warnings.push_back("perplexity " + format_shortest(perplexity) + " too large for " + std::to_string(n) +
                               " points; lowered to " + format_shortest(cal.perplexity));
    }
    const double target = std::log2(cal.perplexity);
    cal.sigmas.resize(n);
    cal.conditional.assign(n * n, 0.0);
    cal.entropies.resize(n);

    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t si = 0; si < count; ++si) {
        const auto i = static_cast<std::size_t>(si);
        const auto d = sq_distances.subspan(i * n, n);
        const auto row = std::span(cal.conditional).subspan(i * n, n);
        double d_min = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) d_min = std::min(d_min, d[j]);

        double beta = 1.0;
        double lo = 0.0;
        double hi = std::numeric_limits<double>::infinity();
        double h = evaluate_row(d, i, d_min, beta, row);
        for (int it = 0; it < kMaxBisection && std::abs(h - target) > kEntropyTolerance; ++it) {
            if (h > target) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
            h = evaluate_row(d, i, d_min, beta, row);
        }
        cal.entropies[i] = h;
        cal.sigmas[i] = std::sqrt(1.0 / (2.0 * beta));
    }
    return cal;
}

std::vector<double> symmetrize(std::span<const double> conditional, std::size_t n) {
    std::vector<double> joint(n * n, 0.0);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) joint[i * n + j] = (conditional[i * n + j] + conditional[j * n + i]) * scale;
    return joint;
}

ProjectedPoints tsne(std::span<const double> points, std::size_t n, std::size_t dim, const TsneParams& params,
                     std::vector<std::string> labels) {
    params.validate();
    if (n < 5) throw ParameterError("n", "t-SNE needs at least 5 points, got " + std::to_string(n));
    if (dim == 0 || points.size() != n * dim) throw DimensionError(n * dim, points.size());
    for (double v : points)
        if (!std::isfinite(v)) throw ParameterError("embeddings", "non-finite input value");
    if (!labels.empty() && labels.size() != n) throw DimensionError(n, labels.size());

    std::vector<double> sq(n * n);
    kernels::parallel::pairwise_sq_distances(points, n, dim, sq);
    Calibration cal = calibrate_perplexity(sq, n, params.perplexity);
    const std::vector<double> p = symmetrize(cal.conditional, n);

    ProjectedPoints out;
    out.perplexity = cal.perplexity;
    out.warnings = std::move(cal.warnings);
    out.labels = std::move(labels);
    out.coords.resize(2 * n);
    Rng rng(derive_seed(params.seed, 0x75e));
    for (auto& v : out.coords) v = rng.normal() * params.init_sigma;
    out.initial_kl = kernels::parallel::tsne_kl(p, out.coords, n);

    // All inputs identical: P is uniform and the collapsed start is already optimal.
    // Exaggerated steps from there overshoot and never contract again.
    const bool degenerate = std::all_of(sq.begin(), sq.end(), [](double d) { return d == 0.0; });
    if (degenerate) out.warnings.push_back("all points identical; layout left at initialisation");

    // Step cap from the linearised attraction: past 1 / (4 E max_i sum_j p_ij)
    // small inputs oscillate apart and do not recover within the schedule.
    double max_row = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        max_row = std::max(max_row, std::accumulate(p.begin() + i * n, p.begin() + (i + 1) * n, 0.0));
    auto step_size = [&](double exaggeration) {
        return max_row > 0.0 ? std::min(params.learning_rate, 1.0 / (4.0 * exaggeration * max_row)) : params.learning_rate;
    };
    std::vector<double> grad(2 * n), update(2 * n, 0.0), gains(2 * n, 1.0);
    auto& y = out.coords;
    for (int iter = 0; iter < (degenerate ? 0 : params.iterations); ++iter) {
        const double exaggeration = iter < params.exaggeration_iters ? params.early_exaggeration : 1.0;
        const double momentum = iter < params.momentum_switch_iter ? params.initial_momentum : params.final_momentum;
        const double rate = step_size(exaggeration);
        kernels::parallel::tsne_gradient(p, y, n, exaggeration, grad);
        for (std::size_t k = 0; k < 2 * n; ++k) {
            if (!std::isfinite(grad[k])) throw NumericalError(iter, "non-finite t-SNE gradient");
            gains[k] = (grad[k] > 0.0) != (update[k] > 0.0) ? gains[k] + 0.2 : gains[k] * 0.8;
            gains[k] = std::max(gains[k], 0.01);
            update[k] = momentum * update[k] - rate * gains[k] * grad[k];
            y[k] += update[k];
        }
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mx += y[2 * i];
            my += y[2 * i + 1];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[2 * i] -= mx;
            y[2 * i + 1] -= my;
            if (!std::isfinite(y[2 * i]) || !std::isfinite(y[2 * i + 1]))
                throw NumericalError(iter, "non-finite t-SNE coordinate");
        }
    }
    out.iterations = degenerate ? 0 : params.iterations;
    out.final_kl = kernels::parallel::tsne_kl(p, y, n);
    if (!std::isfinite(out.final_kl)) throw NumericalError(params.iterations, "non-finite KL divergence");
    return out;
}

void write_projection_csv(const ProjectedPoints& points, std::span<const std::uint64_t> ids, std::ostream& out) {
    if (ids.size() != points.size()) throw DimensionError(points.size(), ids.size());
    out << "id,x,y,label\n";
    for (std::size_t i = 0; i < points.size(); ++i)
        out << ids[i] << ',' << format_shortest(points.coords[2 * i]) << ',' << format_shortest(points.coords[2 * i + 1])
            << ',' << (points.labels.empty() ? std::string() : points.labels[i]) << '\n';
}

nlohmann::json projection_report(const ProjectedPoints& points, const TsneParams& params, const std::string& note) {
    return {{"params", to_json(params)},
            {"effective_perplexity", points.perplexity},
            {"initial_kl", points.initial_kl},
            {"final_kl", points.final_kl},
            {"iterations", points.iterations},
            {"points", points.size()},
            {"warnings", points.warnings},
            {"note", note}};
}

void write_projection_svg(const ProjectedPoints& points, std::ostream& out) {
    constexpr double kSize = 640.0;
    constexpr double kMargin = 40.0;
    static constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                             "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    for (std::size_t i = 0; i < points.size(); ++i) {
        min_x = std::min(min_x, points.coords[2 * i]);
        max_x = std::max(max_x, points.coords[2 * i]);
        min_y = std::min(min_y, points.coords[2 * i + 1]);
        max_y = std::max(max_y, points.coords[2 * i + 1]);
    }
    const double span = std::max({max_x - min_x, max_y - min_y, 1e-12});
    std::map<std::string, std::size_t> colour;
    for (const auto& l : points.labels) colour.emplace(l, colour.size());

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double px = kMargin + (points.coords[2 * i] - min_x) / span * (kSize - 2 * kMargin);
        const double py = kSize - kMargin - (points.coords[2 * i + 1] - min_y) / span * (kSize - 2 * kMargin);
        const std::size_t c = points.labels.empty() ? 0 : colour[points.labels[i]];
        out << "<circle cx=\"" << format_fixed(px, 2) << "\" cy=\"" << format_fixed(py, 2) << "\" r=\"3\" fill=\""
            << kPalette[c % kPalette.size()] << "\" fill-opacity=\"0.75\"/>\n";
    }
    double ly = 20.0;
    for (const auto& [label, c] : colour) {
        out << "<circle cx=\"12\" cy=\"" << ly - 4 << "\" r=\"4\" fill=\"" << kPalette[c % kPalette.size()] << "\"/>";
        out << "<text x=\"20\" y=\"" << ly << "\" font-size=\"12\" font-family=\"sans-serif\">" << label << "</text>\n";
        ly += 16.0;
    }
    out << "</svg>\n";
}

}  // namespace gnssrag
