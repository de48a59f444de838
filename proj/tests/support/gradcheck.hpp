#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kgc/numerics/tensor.hpp"
#include "kgc/rng.hpp"

namespace kgc::testing {

/// |a - n| / max(|a|, |n|, 1e-3); the floor keeps near-zero derivatives from
/// turning rounding noise into large relative errors.
double relative_error(double analytic, double numeric);

struct GradReport {
  double max_error = 0.0;
  std::string worst;  // "leaf[index]: analytic vs numeric"
  std::size_t checked = 0;
};

/// Compares reverse-mode gradients of the scalar `loss()` against central
/// differences with the given step, for every element of every leaf.
GradReport check_gradients(const std::function<Tensor()>& loss, std::vector<Tensor> leaves,
                           double step = 1e-5);

/// Leaf with values uniform in [-1, 1].
Tensor random_leaf(const Shape& shape, Rng& rng, bool sparse = false);
/// Constant (no gradient) with values uniform in [-1, 1].
Tensor random_constant(const Shape& shape, Rng& rng);
/// Total gradient of a leaf: dense part plus row-sparse part.
std::vector<double> full_gradient(const Tensor& leaf);

}  // namespace kgc::testing
