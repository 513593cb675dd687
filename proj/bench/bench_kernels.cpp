#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "assl/kernels.hpp"
#include "assl/prm.hpp"
#include "assl/rng.hpp"

namespace {

using namespace assl;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng = make_stream(seed, "bench");
    std::normal_distribution<double> dist;
    Matrix m(rows, cols);
    for (auto& v : m.values()) v = dist(rng);
    return m;
}

// Shapes match a 128-row batch through the 39 -> 64 -> 32 encoder and larger
// full-dataset passes.
template <void (*Gemm)(const Matrix&, const Matrix&, Matrix&)>
void BM_gemm_nt(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto k = static_cast<std::size_t>(state.range(1));
    const auto m = static_cast<std::size_t>(state.range(2));
    const Matrix a = random_matrix(n, k, 1), b = random_matrix(m, k, 2);
    Matrix c(n, m);
    for (auto _ : state) {
        Gemm(a, b, c);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * k * m));
}

template <void (*Gemm)(const Matrix&, const Matrix&, Matrix&)>
void BM_gemm_tn(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto k = static_cast<std::size_t>(state.range(1));
    const auto m = static_cast<std::size_t>(state.range(2));
    const Matrix a = random_matrix(n, m, 3), b = random_matrix(n, k, 4);
    Matrix c(m, k);
    for (auto _ : state) {
        Gemm(a, b, c);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * k * m));
}

void gemm_args(benchmark::internal::Benchmark* b) {
    b->Args({128, 39, 64})->Args({128, 64, 32})->Args({2000, 39, 64})->Args({18000, 64, 32});
}

BENCHMARK(BM_gemm_nt<kernels::serial::gemm_nt>)->Name("gemm_nt/serial")->Apply(gemm_args);
BENCHMARK(BM_gemm_nt<kernels::omp::gemm_nt>)->Name("gemm_nt/omp")->Apply(gemm_args);
BENCHMARK(BM_gemm_tn<kernels::serial::gemm_tn>)->Name("gemm_tn/serial")->Apply(gemm_args);
BENCHMARK(BM_gemm_tn<kernels::omp::gemm_tn>)->Name("gemm_tn/omp")->Apply(gemm_args);

template <prm::SplitCandidate (*Search)(const Matrix&, const prm::SortedColumns&, std::span<const double>,
                                        std::span<const int>, int, std::size_t)>
void BM_best_split(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const Matrix x = random_matrix(n, 39, 5);
    const prm::SortedColumns sorted(x);
    const Matrix t = random_matrix(n, 1, 6);
    const std::vector<int> node_of(n, 0);
    for (auto _ : state) {
        auto s = Search(x, sorted, t.values(), node_of, 0, 5);
        benchmark::DoNotOptimize(s);
    }
}

BENCHMARK(BM_best_split<prm::serial::best_split>)->Name("best_split/serial")->Arg(1600)->Arg(16000);
BENCHMARK(BM_best_split<prm::omp::best_split>)->Name("best_split/omp")->Arg(1600)->Arg(16000);

}  // namespace

BENCHMARK_MAIN();
