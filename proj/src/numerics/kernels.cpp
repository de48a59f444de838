#include "kgc/kernels.hpp"

#include <algorithm>
#include <cmath>

#if defined(KGC_HAVE_OPENMP)
#include <omp.h>
#endif

namespace kgc::kernels {

int grid_bucket(double s) {
  if (!(s >= 0.0)) return -1;
  int k = static_cast<int>(std::floor(s * 100.0));
  k = std::clamp(k, 0, 100);
  // s * 100 may round across a grid line; settle against the exact comparison.
  while (k < 100 && s >= static_cast<double>(k + 1) / 100.0) ++k;
  while (k > 0 && s < static_cast<double>(k) / 100.0) --k;
  return k;
}

namespace {

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t d = 0; d < n; ++d) s += a[d] * b[d];
  return s;
}

inline void gemm_nn_row(const double* a, const double* b, double* c, std::size_t k,
                        std::size_t n, bool accumulate) {
  if (!accumulate) std::fill(c, c + n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double av = a[p];
    const double* brow = b + p * n;
    for (std::size_t j = 0; j < n; ++j) c[j] += av * brow[j];
  }
}

inline void gemm_nt_row(const double* a, const double* b, double* c, std::size_t k,
                        std::size_t n, bool accumulate) {
  for (std::size_t j = 0; j < n; ++j) {
    const double v = dot(a, b + j * k, k);
    c[j] = accumulate ? c[j] + v : v;
  }
}

inline void gemm_tn_row(const double* a, const double* b, double* c, std::size_t i,
                        std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  if (!accumulate) std::fill(c, c + n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double av = a[p * m + i];
    const double* brow = b + p * n;
    for (std::size_t j = 0; j < n; ++j) c[j] += av * brow[j];
  }
}

inline void conv_forward_item(const double* x, const double* w, double* y, std::size_t dim,
                              std::size_t channels, std::size_t width) {
  const auto pad = static_cast<std::ptrdiff_t>(width / 2);
  const double* row0 = x;
  const double* row1 = x + dim;
  for (std::size_t c = 0; c < channels; ++c) {
    const double* w0 = w + c * 2 * width;
    const double* w1 = w0 + width;
    double* out = y + c * dim;
    for (std::size_t eta = 0; eta < dim; ++eta) {
      double acc = 0.0;
      for (std::size_t t = 0; t < width; ++t) {
        const std::ptrdiff_t q = static_cast<std::ptrdiff_t>(eta + t) - pad;
        if (q < 0 || q >= static_cast<std::ptrdiff_t>(dim)) continue;
        acc += w0[t] * row0[q];
        acc += w1[t] * row1[q];
      }
      out[eta] = acc;
    }
  }
}

inline void conv_backward_input_item(const double* w, const double* dy, double* dx,
                                     std::size_t dim, std::size_t channels, std::size_t width) {
  const auto pad = static_cast<std::ptrdiff_t>(width / 2);
  for (std::size_t c = 0; c < channels; ++c) {
    const double* w0 = w + c * 2 * width;
    const double* w1 = w0 + width;
    const double* g = dy + c * dim;
    for (std::size_t eta = 0; eta < dim; ++eta) {
      const double ge = g[eta];
      for (std::size_t t = 0; t < width; ++t) {
        const std::ptrdiff_t q = static_cast<std::ptrdiff_t>(eta + t) - pad;
        if (q < 0 || q >= static_cast<std::ptrdiff_t>(dim)) continue;
        dx[q] += w0[t] * ge;
        dx[dim + q] += w1[t] * ge;
      }
    }
  }
}

inline void conv_backward_weight_channel(const double* x, const double* dy, double* dw,
                                         std::size_t c, std::size_t batch, std::size_t dim,
                                         std::size_t channels, std::size_t width) {
  const auto pad = static_cast<std::ptrdiff_t>(width / 2);
  double* dw0 = dw + c * 2 * width;
  double* dw1 = dw0 + width;
  for (std::size_t b = 0; b < batch; ++b) {
    const double* row0 = x + b * 2 * dim;
    const double* row1 = row0 + dim;
    const double* g = dy + (b * channels + c) * dim;
    for (std::size_t t = 0; t < width; ++t) {
      double a0 = 0.0;
      double a1 = 0.0;
      for (std::size_t eta = 0; eta < dim; ++eta) {
        const std::ptrdiff_t q = static_cast<std::ptrdiff_t>(eta + t) - pad;
        if (q < 0 || q >= static_cast<std::ptrdiff_t>(dim)) continue;
        a0 += g[eta] * row0[q];
        a1 += g[eta] * row1[q];
      }
      dw0[t] += a0;
      dw1[t] += a1;
    }
  }
}

// Pairs (i, j), i < j, for rows i in [ib, ie), scanned tile by tile.
void tile_rows_above(const double* u, const std::uint8_t* valid, std::size_t rows,
                     std::size_t dim, double tau, std::size_t ib, std::size_t ie,
                     std::size_t block, std::vector<SimPair>& out) {
  for (std::size_t jb = ib; jb < rows; jb += block) {
    const std::size_t je = std::min(rows, jb + block);
    for (std::size_t i = ib; i < ie; ++i) {
      if (!valid[i]) continue;
      const double* ui = u + i * dim;
      for (std::size_t j = std::max(jb, i + 1); j < je; ++j) {
        if (!valid[j]) continue;
        const double s = dot(ui, u + j * dim, dim);
        if (s >= tau)
          out.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), s});
      }
    }
  }
}

void tile_rows_grid(const double* u, const std::uint8_t* valid, std::size_t rows,
                    std::size_t dim, std::size_t ib, std::size_t ie, std::size_t block,
                    std::array<std::uint64_t, kGridPoints>& bucket) {
  for (std::size_t jb = ib; jb < rows; jb += block) {
    const std::size_t je = std::min(rows, jb + block);
    for (std::size_t i = ib; i < ie; ++i) {
      if (!valid[i]) continue;
      const double* ui = u + i * dim;
      for (std::size_t j = std::max(jb, i + 1); j < je; ++j) {
        if (!valid[j]) continue;
        const int k = grid_bucket(dot(ui, u + j * dim, dim));
        if (k >= 0) ++bucket[static_cast<std::size_t>(k)];
      }
    }
  }
}

GridCounts cumulate(const std::array<std::uint64_t, kGridPoints>& bucket) {
  GridCounts at_least{};
  std::uint64_t running = 0;
  for (std::size_t k = kGridPoints; k-- > 0;) {
    running += bucket[k];
    at_least[k] = running;
  }
  return at_least;
}

// Pairs from tile_rows_above arrive grouped by j-tile; restore (i, j) order.
void sort_pairs(std::vector<SimPair>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const SimPair& a, const SimPair& b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  });
}

}  // namespace

namespace serial {

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i)
    gemm_nn_row(a.data() + i * k, b.data(), c.data() + i * n, k, n, accumulate);
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i)
    gemm_nt_row(a.data() + i * k, b.data(), c.data() + i * n, k, n, accumulate);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i)
    gemm_tn_row(a.data(), b.data(), c.data() + i * n, i, m, k, n, accumulate);
}

void conv1d_two_row(std::span<const double> x, std::span<const double> w, std::span<double> y,
                    std::size_t batch, std::size_t dim, std::size_t channels, std::size_t width) {
  for (std::size_t b = 0; b < batch; ++b)
    conv_forward_item(x.data() + b * 2 * dim, w.data(), y.data() + b * channels * dim, dim,
                      channels, width);
}

void conv1d_two_row_backward(std::span<const double> x, std::span<const double> w,
                             std::span<const double> dy, std::span<double> dx,
                             std::span<double> dw, std::size_t batch, std::size_t dim,
                             std::size_t channels, std::size_t width) {
  if (!dx.empty())
    for (std::size_t b = 0; b < batch; ++b)
      conv_backward_input_item(w.data(), dy.data() + b * channels * dim, dx.data() + b * 2 * dim,
                               dim, channels, width);
  if (!dw.empty())
    for (std::size_t c = 0; c < channels; ++c)
      conv_backward_weight_channel(x.data(), dy.data(), dw.data(), c, batch, dim, channels, width);
}

std::vector<SimPair> cosine_pairs_above(std::span<const double> unit_rows,
                                        std::span<const std::uint8_t> valid, std::size_t rows,
                                        std::size_t dim, double tau, std::size_t block) {
  block = std::max<std::size_t>(block, 1);
  std::vector<SimPair> out;
  for (std::size_t ib = 0; ib < rows; ib += block) {
    std::vector<SimPair> local;
    tile_rows_above(unit_rows.data(), valid.data(), rows, dim, tau, ib,
                    std::min(rows, ib + block), block, local);
    sort_pairs(local);
    out.insert(out.end(), local.begin(), local.end());
  }
  return out;
}

GridCounts cosine_grid_counts(std::span<const double> unit_rows,
                              std::span<const std::uint8_t> valid, std::size_t rows,
                              std::size_t dim, std::size_t block) {
  block = std::max<std::size_t>(block, 1);
  std::array<std::uint64_t, kGridPoints> bucket{};
  for (std::size_t ib = 0; ib < rows; ib += block)
    tile_rows_grid(unit_rows.data(), valid.data(), rows, dim, ib, std::min(rows, ib + block),
                   block, bucket);
  return cumulate(bucket);
}

}  // namespace serial

namespace parallel {

namespace {
inline std::ptrdiff_t sz(std::size_t v) { return static_cast<std::ptrdiff_t>(v); }
}  // namespace

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sz(m); ++i)
    gemm_nn_row(a.data() + i * sz(k), b.data(), c.data() + i * sz(n), k, n, accumulate);
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sz(m); ++i)
    gemm_nt_row(a.data() + i * sz(k), b.data(), c.data() + i * sz(n), k, n, accumulate);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sz(m); ++i)
    gemm_tn_row(a.data(), b.data(), c.data() + i * sz(n), static_cast<std::size_t>(i), m, k, n,
                accumulate);
}

void conv1d_two_row(std::span<const double> x, std::span<const double> w, std::span<double> y,
                    std::size_t batch, std::size_t dim, std::size_t channels, std::size_t width) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < sz(batch); ++b)
    conv_forward_item(x.data() + b * 2 * sz(dim), w.data(), y.data() + b * sz(channels * dim),
                      dim, channels, width);
}

void conv1d_two_row_backward(std::span<const double> x, std::span<const double> w,
                             std::span<const double> dy, std::span<double> dx,
                             std::span<double> dw, std::size_t batch, std::size_t dim,
                             std::size_t channels, std::size_t width) {
  if (!dx.empty()) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < sz(batch); ++b)
      conv_backward_input_item(w.data(), dy.data() + b * sz(channels * dim),
                               dx.data() + b * 2 * sz(dim), dim, channels, width);
  }
  if (!dw.empty()) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < sz(channels); ++c)
      conv_backward_weight_channel(x.data(), dy.data(), dw.data(), static_cast<std::size_t>(c),
                                   batch, dim, channels, width);
  }
}

std::vector<SimPair> cosine_pairs_above(std::span<const double> unit_rows,
                                        std::span<const std::uint8_t> valid, std::size_t rows,
                                        std::size_t dim, double tau, std::size_t block) {
  block = std::max<std::size_t>(block, 1);
  const std::size_t blocks = (rows + block - 1) / block;
  std::vector<std::vector<SimPair>> per_block(blocks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t bi = 0; bi < sz(blocks); ++bi) {
    const std::size_t ib = static_cast<std::size_t>(bi) * block;
    auto& local = per_block[static_cast<std::size_t>(bi)];
    tile_rows_above(unit_rows.data(), valid.data(), rows, dim, tau, ib,
                    std::min(rows, ib + block), block, local);
    sort_pairs(local);
  }
  std::vector<SimPair> out;
  for (auto& local : per_block) out.insert(out.end(), local.begin(), local.end());
  return out;
}

GridCounts cosine_grid_counts(std::span<const double> unit_rows,
                              std::span<const std::uint8_t> valid, std::size_t rows,
                              std::size_t dim, std::size_t block) {
  block = std::max<std::size_t>(block, 1);
  const std::size_t blocks = (rows + block - 1) / block;
  std::vector<std::array<std::uint64_t, kGridPoints>> per_block(blocks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t bi = 0; bi < sz(blocks); ++bi) {
    const std::size_t ib = static_cast<std::size_t>(bi) * block;
    auto& local = per_block[static_cast<std::size_t>(bi)];
    local.fill(0);
    tile_rows_grid(unit_rows.data(), valid.data(), rows, dim, ib, std::min(rows, ib + block),
                   block, local);
  }
  std::array<std::uint64_t, kGridPoints> bucket{};
  for (const auto& local : per_block)
    for (std::size_t k = 0; k < kGridPoints; ++k) bucket[k] += local[k];
  return cumulate(bucket);
}

}  // namespace parallel

bool openmp_enabled() {
#if defined(KGC_HAVE_OPENMP)
  return true;
#else
  return false;
#endif
}

int max_threads() {
#if defined(KGC_HAVE_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {
// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

inline bool go_parallel(std::size_t work) {
  return openmp_enabled() && max_threads() > 1 && work >= kParallelWork;
}
}  // namespace

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  if (go_parallel(m * k * n))
    parallel::gemm_nn(a, b, c, m, k, n, accumulate);
  else
    serial::gemm_nn(a, b, c, m, k, n, accumulate);
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  if (go_parallel(m * k * n))
    parallel::gemm_nt(a, b, c, m, k, n, accumulate);
  else
    serial::gemm_nt(a, b, c, m, k, n, accumulate);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  if (go_parallel(m * k * n))
    parallel::gemm_tn(a, b, c, m, k, n, accumulate);
  else
    serial::gemm_tn(a, b, c, m, k, n, accumulate);
}

void conv1d_two_row(std::span<const double> x, std::span<const double> w, std::span<double> y,
                    std::size_t batch, std::size_t dim, std::size_t channels, std::size_t width) {
  if (go_parallel(batch * dim * channels * width * 2))
    parallel::conv1d_two_row(x, w, y, batch, dim, channels, width);
  else
    serial::conv1d_two_row(x, w, y, batch, dim, channels, width);
}

void conv1d_two_row_backward(std::span<const double> x, std::span<const double> w,
                             std::span<const double> dy, std::span<double> dx,
                             std::span<double> dw, std::size_t batch, std::size_t dim,
                             std::size_t channels, std::size_t width) {
  if (go_parallel(batch * dim * channels * width * 2))
    parallel::conv1d_two_row_backward(x, w, dy, dx, dw, batch, dim, channels, width);
  else
    serial::conv1d_two_row_backward(x, w, dy, dx, dw, batch, dim, channels, width);
}

}  // namespace kgc::kernels
