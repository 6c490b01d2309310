// Parallel kernels against the serial reference on random unit-cube data.

#include "cfguide/kernels.hpp"
#include "cfguide/reference.hpp"

#include <benchmark/benchmark.h>

#include <random>

using cfguide::Matrix;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (double& x : m.row(r)) x = u(rng);
    return m;
}

// state.range(0): rows per side, state.range(1): dimensions
void BM_nearest_kernel(benchmark::State& state) {
    const auto a = random_matrix(state.range(0), state.range(1), 1);
    const auto b = random_matrix(state.range(0), state.range(1), 2);
    for (auto _ : state) benchmark::DoNotOptimize(cfguide::kernels::nearest_distances(a, b));
    state.SetComplexityN(state.range(0));
}

void BM_nearest_reference(benchmark::State& state) {
    const auto a = random_matrix(state.range(0), state.range(1), 1);
    const auto b = random_matrix(state.range(0), state.range(1), 2);
    for (auto _ : state) benchmark::DoNotOptimize(cfguide::reference::nearest_distances(a, b));
    state.SetComplexityN(state.range(0));
}

void BM_dissimilarity_kernel(benchmark::State& state) {
    const auto a = random_matrix(state.range(0), state.range(1), 3);
    const auto b = random_matrix(state.range(0), state.range(1), 4);
    for (auto _ : state) benchmark::DoNotOptimize(cfguide::kernels::mean_dissimilarity(a, b));
}

void BM_dissimilarity_reference(benchmark::State& state) {
    const auto a = random_matrix(state.range(0), state.range(1), 3);
    const auto b = random_matrix(state.range(0), state.range(1), 4);
    for (auto _ : state) benchmark::DoNotOptimize(cfguide::reference::mean_dissimilarity(a, b));
}

void sizes(benchmark::internal::Benchmark* b) {
    for (int n : {128, 512, 2048})
        for (int m : {3, 14}) b->Args({n, m});
}

}  // namespace

BENCHMARK(BM_nearest_kernel)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_nearest_reference)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dissimilarity_kernel)->Apply(sizes)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_dissimilarity_reference)->Apply(sizes)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
