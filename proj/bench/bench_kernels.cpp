// Serial reference kernels against their OpenMP counterparts.
// Run: build/bench/bench_kernels [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include <vector>

#include "gnssrag/embedder.hpp"
#include "gnssrag/kernels.hpp"
#include "gnssrag/rng.hpp"

namespace {

using namespace gnssrag;

// Full-size corpus.
constexpr std::size_t kCorpus = 42592;

std::vector<float> random_rows(std::size_t rows, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<float> out(rows * dim);
    for (auto& v : out) v = static_cast<float>(rng.normal());
    return out;
}

std::vector<double> random_doubles(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) v = rng.normal();
    return out;
}

template <auto Kernel>
void BM_score_rows(benchmark::State& state) {
    const auto rows = random_rows(kCorpus, kEmbeddingDim, 1);
    const auto query = random_rows(1, kEmbeddingDim, 2);
    std::vector<double> out(kCorpus);
    for (auto _ : state) {
        Kernel(Metric::Cosine, rows, kEmbeddingDim, query, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * kCorpus));
}

template <auto Kernel>
void BM_project(benchmark::State& state) {
    const auto& matrix = projection_matrix();
    const auto features = random_doubles(kChannels, 3);
    std::vector<double> out(kEmbeddingDim);
    for (auto _ : state) {
        Kernel(matrix, features, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <auto Kernel>
void BM_pairwise(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto points = random_doubles(n * kEmbeddingDim, 4);
    std::vector<double> out(n * n);
    for (auto _ : state) {
        Kernel(points, n, kEmbeddingDim, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <auto Kernel>
void BM_tsne_gradient(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto p = random_doubles(n * n, 5);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            p[i * n + j] = i == j ? 0.0 : std::abs(p[i * n + j]);
            sum += p[i * n + j];
        }
    for (auto& v : p) v /= sum;
    const auto y = random_doubles(n * 2, 6);
    std::vector<double> grad(n * 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(Kernel(p, y, n, 1.0, grad));
    }
}

BENCHMARK(BM_score_rows<kernels::serial::score_rows>)->Name("score_rows/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_score_rows<kernels::parallel::score_rows>)->Name("score_rows/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_project<kernels::serial::project>)->Name("project/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_project<kernels::parallel::project>)->Name("project/parallel")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_pairwise<kernels::serial::pairwise_sq_distances>)->Name("pairwise/serial")->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pairwise<kernels::parallel::pairwise_sq_distances>)->Name("pairwise/parallel")->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tsne_gradient<kernels::serial::tsne_gradient>)->Name("tsne_gradient/serial")->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tsne_gradient<kernels::parallel::tsne_gradient>)->Name("tsne_gradient/parallel")->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
