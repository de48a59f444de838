#include "kgc/numerics/optim.hpp"

#include <cmath>

#include "kgc/error.hpp"

namespace kgc {

Adam::Adam(AdamOptions options) : options_(options) {
  if (!(options_.lr >= 0.0) || !std::isfinite(options_.lr))
    throw ConfigError("adam: learning rate must be finite and non-negative");
  if (!(options_.beta1 >= 0.0 && options_.beta1 < 1.0) ||
      !(options_.beta2 >= 0.0 && options_.beta2 < 1.0))
    throw ConfigError("adam: betas must lie in [0, 1)");
  if (!(options_.eps > 0.0)) throw ConfigError("adam: eps must be positive");
}

void Adam::step(ParameterSet& params) {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(options_.beta1, t);
  const double c2 = 1.0 - std::pow(options_.beta2, t);
  const double b1 = options_.beta1, b2 = options_.beta2;

  auto update = [&](double& p, double& m, double& v, double g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    p -= options_.lr * (m / c1) / (std::sqrt(v / c2) + options_.eps);
  };

  for (auto& np : params.items()) {
    Tensor& tensor = np.tensor;
    auto& slot = state_[np.name];
    const std::size_t n = tensor.numel();
    if (slot.m.size() != n) {
      slot.m.assign(n, 0.0);
      slot.v.assign(n, 0.0);
    }
    auto values = tensor.mutable_values();
    const auto dense = tensor.grad();
    const bool has_dense = dense.size() == n;
    const auto& sparse = tensor.sparse_grad();

    if (has_dense) {
      std::vector<double> g(dense.begin(), dense.end());
      if (tensor.has_sparse_grad()) {
        const std::size_t w = sparse.width();
        for (std::size_t s = 0; s < sparse.rows().size(); ++s) {
          const auto row = sparse.slot(s);
          for (std::size_t j = 0; j < w; ++j) g[sparse.rows()[s] * w + j] += row[j];
        }
      }
      for (std::size_t i = 0; i < n; ++i) update(values[i], slot.m[i], slot.v[i], g[i]);
    } else if (tensor.has_sparse_grad() && !sparse.empty()) {
      const std::size_t w = sparse.width();
      for (std::size_t s = 0; s < sparse.rows().size(); ++s) {
        const std::size_t base = sparse.rows()[s] * w;
        const auto row = sparse.slot(s);
        for (std::size_t j = 0; j < w; ++j)
          update(values[base + j], slot.m[base + j], slot.v[base + j], row[j]);
      }
    }
  }
}

double grad_norm(const ParameterSet& params) {
  double sq = 0.0;
  for (const auto& np : params.items()) {
    for (double g : np.tensor.grad()) sq += g * g;
    const auto& sparse = np.tensor.sparse_grad();
    for (std::size_t s = 0; s < sparse.rows().size(); ++s)
      for (double g : sparse.slot(s)) sq += g * g;
  }
  return std::sqrt(sq);
}

double clip_grad_norm(ParameterSet& params, double max_norm) {
  if (!(max_norm > 0.0)) throw ConfigError("clip_grad_norm: max_norm must be positive");
  const double norm = grad_norm(params);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& np : params.items()) {
      if (!np.tensor.grad().empty())
        for (double& g : np.tensor.mutable_grad()) g *= factor;
      auto& sparse = np.tensor.mutable_sparse_grad();
      for (std::size_t s = 0; s < sparse.rows().size(); ++s)
        for (double& g : sparse.slot(s)) g *= factor;
    }
  }
  return norm;
}

}  // namespace kgc
