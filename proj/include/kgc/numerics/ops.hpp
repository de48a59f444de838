#pragma once

// Differentiable ops. Each records a backward rule when any input requires a
// gradient and recording is enabled (see NoGradGuard). Shape violations throw
// ShapeError naming the op and the offending shapes.

#include <cstddef>
#include <span>
#include <vector>

#include "kgc/numerics/tensor.hpp"
#include "kgc/rng.hpp"

namespace kgc {

// -- linear algebra --------------------------------------------------------

/// [m x k] * [k x n]
Tensor matmul(const Tensor& a, const Tensor& b);
/// [m x k] * [n x k]^T, used to score against every candidate row at once.
Tensor matmul_nt(const Tensor& a, const Tensor& b);

// -- elementwise -----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
/// Multiplies column j of a 2-D tensor by the constant factors[j].
Tensor scale_cols(const Tensor& a, std::span<const double> factors);

/// Inverted dropout: in train mode each element is zeroed with probability p
/// and survivors are divided by 1 - p; in eval mode the input is returned.
Tensor dropout(const Tensor& a, double p, bool train, Rng& rng);

// -- structure -------------------------------------------------------------

/// Concatenates 2-D tensors with equal row counts along columns.
Tensor concat_cols(const std::vector<Tensor>& parts);
/// Stacks equal-shape 2-D tensors [m x n] into [m x parts x n].
Tensor stack_rows(const std::vector<Tensor>& parts);
Tensor reshape(const Tensor& a, Shape shape);
/// Columns [begin, end) of a 2-D tensor.
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);

// -- sparse row access -----------------------------------------------------

/// Embedding lookup: out[i] = table[index[i]].
Tensor gather_rows(const Tensor& table, std::span<const std::size_t> index);
/// out[index[i]] += a[i] over an output with `rows` rows.
Tensor scatter_add_rows(const Tensor& a, std::span<const std::size_t> index, std::size_t rows);
/// Row-wise dot product of two [m x n] tensors, giving [m].
Tensor row_dot(const Tensor& a, const Tensor& b);
/// out[i, :] = a[i, :] * w[i] for a [m x n] and w [m].
Tensor scale_rows(const Tensor& a, const Tensor& w);

// -- normalisation ---------------------------------------------------------

/// Softmax along the last axis of a 2-D tensor.
Tensor softmax_rows(const Tensor& a);
/// Softmax of a 1-D tensor within each segment [offsets[s], offsets[s+1]).
Tensor segment_softmax(const Tensor& a, std::span<const std::size_t> offsets);

// -- convolution -----------------------------------------------------------

/// Two-row 1-D convolution: x [batch x 2 x dim], kernels [channels x 2 x K]
/// with K odd, zero padding K/2 and stride 1; output [batch x channels*dim]
/// where out[b, c*dim + eta] = sum_t k[c,0,t] x[b,0,eta+t-K/2] + k[c,1,t] x[b,1,eta+t-K/2].
Tensor conv1d_two_row(const Tensor& x, const Tensor& kernels);

// -- reductions and losses ---------------------------------------------------

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
/// Sum of squared elements.
Tensor sum_squares(const Tensor& a);
/// Mean binary cross-entropy between probabilities and constant targets of
/// the same shape. Probabilities are clamped to [1e-7, 1 - 1e-7] before the log.
Tensor binary_cross_entropy(const Tensor& probs, const Tensor& targets);

inline constexpr double kProbClamp = 1e-7;

}  // namespace kgc
