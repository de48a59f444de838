#pragma once

// Dense inner loops shared by the autograd ops and the similarity search.
//
// Every kernel exists twice: `serial::` is the reference, `parallel::` splits
// the outer loop across OpenMP threads. Each output element is produced by one
// thread with the same summation order as the serial version, so the two are
// bit-identical for any thread count.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace kgc::kernels {

/// An unordered node pair (first < second) with its cosine similarity.
struct SimPair {
  std::uint32_t first;
  std::uint32_t second;
  double similarity;

  friend bool operator==(const SimPair&, const SimPair&) = default;
};

/// Number of 0.01-spaced threshold grid points in [0, 1].
inline constexpr std::size_t kGridPoints = 101;

/// at_least[k] = number of pairs with cosine >= k / 100.
using GridCounts = std::array<std::uint64_t, kGridPoints>;

/// Largest k in [0, 100] with s >= k / 100, or -1 if s < 0.
int grid_bucket(double s);

namespace serial {

// C[m x n] (+)= A[m x k] * B[k x n]
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
// C[m x n] (+)= A[m x k] * B[n x k]^T
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
// C[m x n] (+)= A[k x m]^T * B[k x n]
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);

// Two-row 1-D convolution with zero padding K/2 (K odd).
//   x: [batch x 2 x dim], w: [channels x 2 x K], y: [batch x channels*dim]
void conv1d_two_row(std::span<const double> x, std::span<const double> w, std::span<double> y,
                    std::size_t batch, std::size_t dim, std::size_t channels, std::size_t width);
// Accumulates dx and dw from dy.
void conv1d_two_row_backward(std::span<const double> x, std::span<const double> w,
                             std::span<const double> dy, std::span<double> dx,
                             std::span<double> dw, std::size_t batch, std::size_t dim,
                             std::size_t channels, std::size_t width);

// All pairs i < j of unit rows with dot >= tau; rows with valid[i] == 0 are
// skipped. Output ordered by (first, second).
std::vector<SimPair> cosine_pairs_above(std::span<const double> unit_rows,
                                        std::span<const std::uint8_t> valid, std::size_t rows,
                                        std::size_t dim, double tau, std::size_t block);
GridCounts cosine_grid_counts(std::span<const double> unit_rows,
                              std::span<const std::uint8_t> valid, std::size_t rows,
                              std::size_t dim, std::size_t block);

}  // namespace serial

namespace parallel {

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void conv1d_two_row(std::span<const double> x, std::span<const double> w, std::span<double> y,
                    std::size_t batch, std::size_t dim, std::size_t channels, std::size_t width);
void conv1d_two_row_backward(std::span<const double> x, std::span<const double> w,
                             std::span<const double> dy, std::span<double> dx,
                             std::span<double> dw, std::size_t batch, std::size_t dim,
                             std::size_t channels, std::size_t width);
std::vector<SimPair> cosine_pairs_above(std::span<const double> unit_rows,
                                        std::span<const std::uint8_t> valid, std::size_t rows,
                                        std::size_t dim, double tau, std::size_t block);
GridCounts cosine_grid_counts(std::span<const double> unit_rows,
                              std::span<const std::uint8_t> valid, std::size_t rows,
                              std::size_t dim, std::size_t block);

}  // namespace parallel

/// True when the parallel variants were compiled with OpenMP.
bool openmp_enabled();
int max_threads();

// Dispatchers used by the rest of the library: parallel above a work
// threshold, serial below it.
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void conv1d_two_row(std::span<const double> x, std::span<const double> w, std::span<double> y,
                    std::size_t batch, std::size_t dim, std::size_t channels, std::size_t width);
void conv1d_two_row_backward(std::span<const double> x, std::span<const double> w,
                             std::span<const double> dy, std::span<double> dx,
                             std::span<double> dw, std::size_t batch, std::size_t dim,
                             std::size_t channels, std::size_t width);

}  // namespace kgc::kernels
