#pragma once

// Hot loops of the pipeline. Every kernel exists twice: a serial reference
// and an OpenMP version. Both evaluate each output element with the same
// inner routine in the same order, so their results are bit-identical for
// any thread count; tests/unit/test_kernels.cpp holds them to that.

#include <cstddef>
#include <cstdint>
#include <span>

namespace gnssrag {

enum class Metric : std::uint8_t { Cosine = 0, L2 = 1 };

namespace kernels {

/// Dot product with four interleaved double accumulators, combined in a fixed order.
double dot(const float* a, const float* b, std::size_t n) noexcept;
double squared_distance(const float* a, const float* b, std::size_t n) noexcept;

/// Cosine: score = dot. L2: score = euclidean distance.
double score(Metric metric, const float* row, const float* query, std::size_t dim) noexcept;

/// Affinity numerators and per-row sums used by the t-SNE gradient.
struct TsneTerms {
    double normalizer = 0.0;  // sum over i != j of 1 / (1 + |y_i - y_j|^2)
};

namespace serial {

/// out[i] = score(rows[i*dim .. (i+1)*dim), query)
void score_rows(Metric metric, std::span<const float> rows, std::size_t dim,
                std::span<const float> query, std::span<double> out);

/// out = matrix * features, matrix is out.size() x features.size(), row-major.
void project(std::span<const double> matrix, std::span<const double> features, std::span<double> out);

/// out[i*n + j] = |x_i - x_j|^2 for n points of dimension dim.
void pairwise_sq_distances(std::span<const double> points, std::size_t n, std::size_t dim,
                           std::span<double> out);

/// Gradient of KL(exaggeration * P || Q) with respect to 2-D coordinates y.
TsneTerms tsne_gradient(std::span<const double> joint_p, std::span<const double> y, std::size_t n,
                        double exaggeration, std::span<double> grad);

/// KL(P || Q) for 2-D coordinates; terms with p_ij == 0 contribute nothing.
double tsne_kl(std::span<const double> joint_p, std::span<const double> y, std::size_t n);

}  // namespace serial

namespace parallel {

void score_rows(Metric metric, std::span<const float> rows, std::size_t dim,
                std::span<const float> query, std::span<double> out);
void project(std::span<const double> matrix, std::span<const double> features, std::span<double> out);
void pairwise_sq_distances(std::span<const double> points, std::size_t n, std::size_t dim,
                           std::span<double> out);
TsneTerms tsne_gradient(std::span<const double> joint_p, std::span<const double> y, std::size_t n,
                        double exaggeration, std::span<double> grad);
double tsne_kl(std::span<const double> joint_p, std::span<const double> y, std::size_t n);

}  // namespace parallel

int max_threads() noexcept;

}  // namespace kernels
}  // namespace gnssrag
