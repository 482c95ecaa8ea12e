#include "gnssrag/kernels.hpp"

#include <cmath>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace gnssrag::kernels {

double dot(const float* a, const float* b, std::size_t n) noexcept {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += static_cast<double>(a[i]) * b[i];
        s1 += static_cast<double>(a[i + 1]) * b[i + 1];
        s2 += static_cast<double>(a[i + 2]) * b[i + 2];
        s3 += static_cast<double>(a[i + 3]) * b[i + 3];
    }
    for (; i < n; ++i) s0 += static_cast<double>(a[i]) * b[i];
    return (s0 + s1) + (s2 + s3);
}

double squared_distance(const float* a, const float* b, std::size_t n) noexcept {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const double d0 = static_cast<double>(a[i]) - b[i];
        const double d1 = static_cast<double>(a[i + 1]) - b[i + 1];
        const double d2 = static_cast<double>(a[i + 2]) - b[i + 2];
        const double d3 = static_cast<double>(a[i + 3]) - b[i + 3];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
    }
    for (; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        s0 += d * d;
    }
    return (s0 + s1) + (s2 + s3);
}

double score(Metric metric, const float* row, const float* query, std::size_t dim) noexcept {
    if (metric == Metric::Cosine) return dot(row, query, dim);
    return std::sqrt(squared_distance(row, query, dim));
}

namespace {

double project_row(const double* row, const double* features, std::size_t n) noexcept {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * features[j];
    return acc;
}

double sq_dist_row(const double* a, const double* b, std::size_t dim) noexcept {
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
    }
    return acc;
}

inline double student_t(const double* y, std::size_t i, std::size_t j) noexcept {
    const double dx = y[2 * i] - y[2 * j];
    const double dy = y[2 * i + 1] - y[2 * j + 1];
    return 1.0 / (1.0 + dx * dx + dy * dy);
}

double numerator_row_sum(const double* y, std::size_t n, std::size_t i) noexcept {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        if (j != i) acc += student_t(y, i, j);
    return acc;
}

void gradient_row(const double* p, const double* y, std::size_t n, std::size_t i, double exaggeration,
                  double inv_z, double* grad) noexcept {
    double gx = 0.0, gy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double num = student_t(y, i, j);
        const double mult = (exaggeration * p[i * n + j] - num * inv_z) * num;
        gx += mult * (y[2 * i] - y[2 * j]);
        gy += mult * (y[2 * i + 1] - y[2 * j + 1]);
    }
    grad[2 * i] = 4.0 * gx;
    grad[2 * i + 1] = 4.0 * gy;
}

double kl_row(const double* p, const double* y, std::size_t n, std::size_t i, double inv_z) noexcept {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double pij = p[i * n + j];
        if (pij <= 0.0) continue;
        const double q = std::max(student_t(y, i, j) * inv_z, 1e-300);
        acc += pij * std::log(pij / q);
    }
    return acc;
}

// Row partial results are always combined serially in index order so the
// parallel variants reproduce the serial sums exactly.
double ordered_sum(const std::vector<double>& parts) noexcept {
    double acc = 0.0;
    for (double v : parts) acc += v;
    return acc;
}

}  // namespace

namespace serial {

void score_rows(Metric metric, std::span<const float> rows, std::size_t dim, std::span<const float> query,
                std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = score(metric, rows.data() + i * dim, query.data(), dim);
}

void project(std::span<const double> matrix, std::span<const double> features, std::span<double> out) {
    const std::size_t n = features.size();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = project_row(matrix.data() + i * n, features.data(), n);
}

void pairwise_sq_distances(std::span<const double> points, std::size_t n, std::size_t dim, std::span<double> out) {
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out[i * n + j] = i == j ? 0.0 : sq_dist_row(points.data() + i * dim, points.data() + j * dim, dim);
}

TsneTerms tsne_gradient(std::span<const double> joint_p, std::span<const double> y, std::size_t n,
                        double exaggeration, std::span<double> grad) {
    std::vector<double> parts(n);
    for (std::size_t i = 0; i < n; ++i) parts[i] = numerator_row_sum(y.data(), n, i);
    const double z = ordered_sum(parts);
    const double inv_z = 1.0 / z;
    for (std::size_t i = 0; i < n; ++i)
        gradient_row(joint_p.data(), y.data(), n, i, exaggeration, inv_z, grad.data());
    return {z};
}

double tsne_kl(std::span<const double> joint_p, std::span<const double> y, std::size_t n) {
    std::vector<double> parts(n);
    for (std::size_t i = 0; i < n; ++i) parts[i] = numerator_row_sum(y.data(), n, i);
    const double inv_z = 1.0 / ordered_sum(parts);
    for (std::size_t i = 0; i < n; ++i) parts[i] = kl_row(joint_p.data(), y.data(), n, i, inv_z);
    return ordered_sum(parts);
}

}  // namespace serial

namespace parallel {

void score_rows(Metric metric, std::span<const float> rows, std::size_t dim, std::span<const float> query,
                std::span<double> out) {
    const auto count = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i)
        out[i] = score(metric, rows.data() + static_cast<std::size_t>(i) * dim, query.data(), dim);
}

void project(std::span<const double> matrix, std::span<const double> features, std::span<double> out) {
    const std::size_t n = features.size();
    const auto count = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i)
        out[i] = project_row(matrix.data() + static_cast<std::size_t>(i) * n, features.data(), n);
}

void pairwise_sq_distances(std::span<const double> points, std::size_t n, std::size_t dim, std::span<double> out) {
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t si = 0; si < count; ++si) {
        const auto i = static_cast<std::size_t>(si);
        for (std::size_t j = 0; j < n; ++j)
            out[i * n + j] = i == j ? 0.0 : sq_dist_row(points.data() + i * dim, points.data() + j * dim, dim);
    }
}

TsneTerms tsne_gradient(std::span<const double> joint_p, std::span<const double> y, std::size_t n,
                        double exaggeration, std::span<double> grad) {
    std::vector<double> parts(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) parts[i] = numerator_row_sum(y.data(), n, static_cast<std::size_t>(i));
    const double z = ordered_sum(parts);
    const double inv_z = 1.0 / z;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i)
        gradient_row(joint_p.data(), y.data(), n, static_cast<std::size_t>(i), exaggeration, inv_z, grad.data());
    return {z};
}

double tsne_kl(std::span<const double> joint_p, std::span<const double> y, std::size_t n) {
    std::vector<double> parts(n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) parts[i] = numerator_row_sum(y.data(), n, static_cast<std::size_t>(i));
    const double inv_z = 1.0 / ordered_sum(parts);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i)
        parts[i] = kl_row(joint_p.data(), y.data(), n, static_cast<std::size_t>(i), inv_z);
    return ordered_sum(parts);
}

}  // namespace parallel

int max_threads() noexcept {
#if defined(_OPENMP)
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace gnssrag::kernels
