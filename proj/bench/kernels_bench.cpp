// Serial vs OpenMP kernel timings. Thread count follows OMP_NUM_THREADS.

#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "kgc/kernels.hpp"

namespace k = kgc::kernels;

namespace {

std::vector<double> random_values(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  std::vector<double> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

std::vector<double> unit_rows(std::size_t rows, std::size_t dim, unsigned seed) {
  auto v = random_values(rows * dim, seed);
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0;
    for (std::size_t d = 0; d < dim; ++d) s += v[i * dim + d] * v[i * dim + d];
    s = std::sqrt(s);
    for (std::size_t d = 0; d < dim; ++d) v[i * dim + d] /= s;
  }
  return v;
}

template <auto Gemm>
void BM_GemmNt(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0)), kk = std::size_t{200}, n = m * 8;
  const auto a = random_values(m * kk, 1), b = random_values(n * kk, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    Gemm(a, b, c, m, kk, n, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m * n * kk));
}

template <auto Conv>
void BM_Conv(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 200, channels = 50, width = 3;
  const auto x = random_values(batch * 2 * dim, 3), w = random_values(channels * 2 * width, 4);
  std::vector<double> y(batch * channels * dim);
  for (auto _ : state) {
    Conv(x, w, y, batch, dim, channels, width);
    benchmark::DoNotOptimize(y.data());
  }
}

template <auto Pairs>
void BM_CosinePairs(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 128;
  const auto u = unit_rows(rows, dim, 5);
  const std::vector<std::uint8_t> valid(rows, 1);
  for (auto _ : state) benchmark::DoNotOptimize(Pairs(u, valid, rows, dim, 0.3, 256));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows * (rows - 1) / 2));
}

}  // namespace

BENCHMARK(BM_GemmNt<k::serial::gemm_nt>)->Name("gemm_nt/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_GemmNt<k::parallel::gemm_nt>)->Name("gemm_nt/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_Conv<k::serial::conv1d_two_row>)->Name("conv1d/serial")->Arg(128);
BENCHMARK(BM_Conv<k::parallel::conv1d_two_row>)->Name("conv1d/parallel")->Arg(128);
BENCHMARK(BM_CosinePairs<k::serial::cosine_pairs_above>)->Name("cosine_pairs/serial")->Arg(4000);
BENCHMARK(BM_CosinePairs<k::parallel::cosine_pairs_above>)->Name("cosine_pairs/parallel")->Arg(4000);

BENCHMARK_MAIN();
