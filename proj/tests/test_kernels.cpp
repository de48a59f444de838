#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "kgc/kernels.hpp"
#include "kgc/rng.hpp"

namespace kk = kgc::kernels;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  kgc::Rng rng = kgc::make_rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = 2.0 * kgc::uniform01(rng) - 1.0;
  return v;
}

std::vector<double> unit_rows(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  auto v = random_values(rows * dim, seed);
  for (std::size_t i = 0; i < rows; ++i) {
    double n = 0;
    for (std::size_t j = 0; j < dim; ++j) n += v[i * dim + j] * v[i * dim + j];
    for (std::size_t j = 0; j < dim; ++j) v[i * dim + j] /= std::sqrt(n);
  }
  return v;
}

}  // namespace

TEST(Kernels, GemmVariantsAreBitIdentical) {
  const std::size_t m = 37, k = 19, n = 23;
  const auto a = random_values(m * k, 1), b = random_values(k * n, 2), bt = random_values(n * k, 3),
             at = random_values(k * m, 4);
  std::vector<double> s(m * n, 0.5), p(m * n, 0.5);
  kk::serial::gemm_nn(a, b, s, m, k, n, true);
  kk::parallel::gemm_nn(a, b, p, m, k, n, true);
  EXPECT_EQ(s, p);
  kk::serial::gemm_nt(a, bt, s, m, k, n, false);
  kk::parallel::gemm_nt(a, bt, p, m, k, n, false);
  EXPECT_EQ(s, p);
  kk::serial::gemm_tn(at, b, s, m, k, n, false);
  kk::parallel::gemm_tn(at, b, p, m, k, n, false);
  EXPECT_EQ(s, p);
}

TEST(Kernels, GemmMatchesLoop) {
  const std::size_t m = 3, k = 4, n = 5;
  const auto a = random_values(m * k, 5), b = random_values(k * n, 6);
  std::vector<double> c(m * n);
  kk::serial::gemm_nn(a, b, c, m, k, n, false);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t t = 0; t < k; ++t) s += a[i * k + t] * b[t * n + j];
      EXPECT_NEAR(c[i * n + j], s, 1e-14);
    }
}

TEST(Kernels, ConvVariantsAreBitIdentical) {
  const std::size_t batch = 9, dim = 17, channels = 6, width = 5;
  const auto x = random_values(batch * 2 * dim, 7), w = random_values(channels * 2 * width, 8),
             dy = random_values(batch * channels * dim, 9);
  std::vector<double> ys(batch * channels * dim), yp(ys.size());
  kk::serial::conv1d_two_row(x, w, ys, batch, dim, channels, width);
  kk::parallel::conv1d_two_row(x, w, yp, batch, dim, channels, width);
  EXPECT_EQ(ys, yp);

  std::vector<double> dxs(x.size()), dxp(x.size()), dws(w.size()), dwp(w.size());
  kk::serial::conv1d_two_row_backward(x, w, dy, dxs, dws, batch, dim, channels, width);
  kk::parallel::conv1d_two_row_backward(x, w, dy, dxp, dwp, batch, dim, channels, width);
  EXPECT_EQ(dxs, dxp);
  EXPECT_EQ(dws, dwp);
}

TEST(Kernels, CosinePairsVariantsAndBlockSizesAgree) {
  const std::size_t rows = 120, dim = 3;
  const auto u = unit_rows(rows, dim, 10);
  std::vector<std::uint8_t> valid(rows, 1);
  valid[7] = 0;
  const auto ref = kk::serial::cosine_pairs_above(u, valid, rows, dim, 0.9, rows);
  ASSERT_FALSE(ref.empty());
  for (std::size_t block : {1, 7, 32, 500}) {
    EXPECT_EQ(kk::serial::cosine_pairs_above(u, valid, rows, dim, 0.9, block), ref);
    EXPECT_EQ(kk::parallel::cosine_pairs_above(u, valid, rows, dim, 0.9, block), ref);
  }
  for (const auto& p : ref) {
    EXPECT_LT(p.first, p.second);
    EXPECT_NE(p.first, 7u);
    EXPECT_NE(p.second, 7u);
  }
}

TEST(Kernels, GridCountsVariantsAgree) {
  const std::size_t rows = 80, dim = 4;
  const auto u = unit_rows(rows, dim, 11);
  std::vector<std::uint8_t> valid(rows, 1);
  const auto s = kk::serial::cosine_grid_counts(u, valid, rows, dim, 16);
  EXPECT_EQ(kk::parallel::cosine_grid_counts(u, valid, rows, dim, 5), s);
  for (std::size_t k = 1; k < kk::kGridPoints; ++k) EXPECT_LE(s[k], s[k - 1]);
}

TEST(Kernels, GridBucket) {
  EXPECT_EQ(kk::grid_bucket(1.0), 100);
  EXPECT_EQ(kk::grid_bucket(0.99), 99);
  EXPECT_EQ(kk::grid_bucket(0.985), 98);
  EXPECT_EQ(kk::grid_bucket(0.0), 0);
  EXPECT_EQ(kk::grid_bucket(-0.2), -1);
  EXPECT_EQ(kk::grid_bucket(0.07), 7);
  EXPECT_EQ(kk::grid_bucket(0.29), 29);
}
