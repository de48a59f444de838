#include <cmath>

#include "gtest/gtest.h"
#include "kgc/error.hpp"
#include "kgc/numerics/ops.hpp"
#include "kgc/numerics/optim.hpp"

using namespace kgc;

namespace {

/// Sets the gradient of every parameter to the given constants via
/// d/dp sum(p * g) = g.
void set_gradient(ParameterSet& params, const std::string& name, std::vector<double> g) {
  Tensor& p = params.get(name);
  p.zero_grad();
  sum(mul(p, Tensor::from_values(p.shape(), std::move(g)))).backward();
}

ParameterSet scalar_set(double value) {
  ParameterSet s;
  s.add("p", Tensor::parameter({1}, {value}), false);
  return s;
}

}  // namespace

TEST(Adam, OneStepFromHandEvaluation) {
  auto params = scalar_set(1.0);
  Adam adam({0.1, 0.9, 0.999, 1e-8});
  set_gradient(params, "p", {1.0});
  adam.step(params);
  // m_hat = v_hat = 1, so the step is lr / (1 + eps).
  EXPECT_NEAR(params.get("p").values()[0], 1.0 - 0.1 / (1.0 + 1e-8), 1e-15);
  EXPECT_NEAR(params.get("p").values()[0], 0.9, 1e-8);
}

TEST(Adam, TwoStepsFollowTheRecurrence) {
  auto params = scalar_set(0.3);
  const double lr = 0.05, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  Adam adam({lr, b1, b2, eps});
  double p = 0.3, m = 0.0, v = 0.0;
  const double grads[] = {0.7, -0.2};
  for (int t = 1; t <= 2; ++t) {
    const double g = grads[t - 1];
    set_gradient(params, "p", {g});
    adam.step(params);
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
    p -= lr * mh / (std::sqrt(vh) + eps);
    EXPECT_NEAR(params.get("p").values()[0], p, 1e-14);
  }
  EXPECT_EQ(adam.steps(), 2);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  auto params = scalar_set(0.25);
  Adam adam({0.1});
  set_gradient(params, "p", {0.0});
  adam.step(params);
  EXPECT_EQ(params.get("p").values()[0], 0.25);
}

TEST(Adam, ZeroLearningRateIsAFrozenStep) {
  ParameterSet params;
  params.add("w", Tensor::parameter({2, 2}, {1, 2, 3, 4}), false);
  Adam adam({0.0});
  set_gradient(params, "w", {0.3, -1, 2, 5});
  adam.step(params);
  const auto w = params.get("w").values();
  EXPECT_EQ(std::vector<double>(w.begin(), w.end()), (std::vector<double>{1, 2, 3, 4}));
}

TEST(Adam, RejectsNegativeOrNonFiniteLearningRate) {
  EXPECT_THROW(Adam({-1e-4}), ConfigError);
  EXPECT_THROW(Adam({std::nan("")}), ConfigError);
  EXPECT_THROW(Adam({INFINITY}), ConfigError);
}

TEST(Adam, SparseTablesUpdateTouchedRowsOnly) {
  ParameterSet params;
  Tensor& table = params.add("t", Tensor::parameter({3, 2}, {1, 2, 3, 4, 5, 6}, true), false);
  Adam adam({0.1});
  const std::vector<std::size_t> idx{1};
  sum(gather_rows(table, idx)).backward();
  adam.step(params);
  const auto v = table.values();
  EXPECT_EQ(v[0], 1.0);
  EXPECT_EQ(v[1], 2.0);
  EXPECT_NE(v[2], 3.0);
  EXPECT_NE(v[3], 4.0);
  EXPECT_EQ(v[4], 5.0);
  EXPECT_EQ(v[5], 6.0);
}

TEST(Adam, IsDeterministic) {
  auto run = [] {
    ParameterSet params;
    params.add("w", Tensor::parameter({3}, {0.1, 0.2, 0.3}), false);
    Adam adam({0.01});
    for (int i = 0; i < 5; ++i) {
      set_gradient(params, "w", {0.5 * i, -0.1, 0.3});
      adam.step(params);
    }
    const auto v = params.get("w").values();
    return std::vector<double>(v.begin(), v.end());
  };
  EXPECT_EQ(run(), run());
}

TEST(ClipGradNorm, ScalesDownToTheCap) {
  ParameterSet params;
  params.add("g", Tensor::parameter({2}, {0, 0}), false);
  set_gradient(params, "g", {3, 4});
  EXPECT_DOUBLE_EQ(clip_grad_norm(params, 1.0), 5.0);
  EXPECT_NEAR(params.get("g").grad()[0], 0.6, 1e-15);
  EXPECT_NEAR(params.get("g").grad()[1], 0.8, 1e-15);
  // Reapplying changes nothing.
  EXPECT_NEAR(clip_grad_norm(params, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(params.get("g").grad()[0], 0.6, 1e-15);
}

TEST(ClipGradNorm, SmallNormsUnchanged) {
  ParameterSet params;
  params.add("g", Tensor::parameter({2}, {0, 0}), false);
  set_gradient(params, "g", {0.3, 0.4});
  EXPECT_DOUBLE_EQ(clip_grad_norm(params, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(params.get("g").grad()[0], 0.3);
  EXPECT_DOUBLE_EQ(params.get("g").grad()[1], 0.4);
}

TEST(ClipGradNorm, CountsSparseAndDenseTogether) {
  ParameterSet params;
  params.add("t", Tensor::parameter({2, 1}, {0, 0}, true), false);
  params.add("d", Tensor::parameter({1}, {0}), false);
  const std::vector<std::size_t> idx{1};
  sum(scale(gather_rows(params.get("t"), idx), 3.0)).backward();
  set_gradient(params, "d", {4.0});
  EXPECT_DOUBLE_EQ(grad_norm(params), 5.0);
}
