#include "kgc/numerics/ops.hpp"

#include <algorithm>
#include <cmath>

#include "kgc/error.hpp"
#include "kgc/kernels.hpp"

namespace kgc {

namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " +
                   to_string(b));
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const std::string& want) {
  throw ShapeError(std::string(op) + ": got shape " + to_string(a) + ", expected " + want);
}

void require_rank(const char* op, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) shape_error(op, t.shape(), std::to_string(rank) + "-D");
}

// Builds the output node; the backward rule is kept only when some input
// needs a gradient and recording is on.
Tensor make_result(const char* op, Shape shape, std::vector<double> value,
                   std::initializer_list<Tensor> inputs, std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->leaf = false;
  bool needs = false;
  if (grad_enabled())
    for (const auto& t : inputs) needs = needs || t.requires_grad();
  if (needs) {
    n->requires_grad = true;
    for (const auto& t : inputs) n->inputs.push_back(t.node_ptr());
    n->backward = std::move(backward);
  }
  return Tensor(std::move(n));
}

Tensor make_result(const char* op, Shape shape, std::vector<double> value,
                   const std::vector<Tensor>& inputs, std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->leaf = false;
  bool needs = false;
  if (grad_enabled())
    for (const auto& t : inputs) needs = needs || t.requires_grad();
  if (needs) {
    n->requires_grad = true;
    for (const auto& t : inputs) n->inputs.push_back(t.node_ptr());
    n->backward = std::move(backward);
  }
  return Tensor(std::move(n));
}

inline Node& in(Node& self, std::size_t i) { return *self.inputs[i]; }

template <typename F>
Tensor unary(const char* op, const Tensor& a, F&& f) {
  const auto x = a.values();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  return make_result(op, a.shape(), std::move(y), {a}, nullptr);
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error(op, a.shape(), b.shape());
}

}  // namespace

// -- linear algebra --------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) shape_error("matmul", a.shape(), b.shape());
  std::vector<double> c(m * n);
  kernels::gemm_nn(a.values(), b.values(), c, m, k, n, false);
  return make_result("matmul", {m, n}, std::move(c), {a, b}, [m, k, n](Node& self) {
    Node& na = in(self, 0);
    Node& nb = in(self, 1);
    if (na.requires_grad) kernels::gemm_nt(self.grad, nb.value, na.ensure_grad(), m, n, k, true);
    if (nb.requires_grad) kernels::gemm_tn(na.value, self.grad, nb.ensure_grad(), k, m, n, true);
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank("matmul_nt", a, 2);
  require_rank("matmul_nt", b, 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k) shape_error("matmul_nt", a.shape(), b.shape());
  std::vector<double> c(m * n);
  kernels::gemm_nt(a.values(), b.values(), c, m, k, n, false);
  return make_result("matmul_nt", {m, n}, std::move(c), {a, b}, [m, k, n](Node& self) {
    Node& na = in(self, 0);
    Node& nb = in(self, 1);
    if (na.requires_grad) kernels::gemm_nn(self.grad, nb.value, na.ensure_grad(), m, n, k, true);
    if (nb.requires_grad) kernels::gemm_tn(self.grad, na.value, nb.ensure_grad(), n, m, k, true);
  });
}

// -- elementwise -----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  require_same("add", a, b);
  const auto x = a.values(), y = b.values();
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] + y[i];
  return make_result("add", a.shape(), std::move(z), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k)
      if (in(self, k).requires_grad) in(self, k).accumulate(self.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same("sub", a, b);
  const auto x = a.values(), y = b.values();
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] - y[i];
  return make_result("sub", a.shape(), std::move(z), {a, b}, [](Node& self) {
    if (in(self, 0).requires_grad) in(self, 0).accumulate(self.grad);
    if (in(self, 1).requires_grad) {
      auto g = in(self, 1).ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same("mul", a, b);
  const auto x = a.values(), y = b.values();
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] * y[i];
  return make_result("mul", a.shape(), std::move(z), {a, b}, [](Node& self) {
    Node& na = in(self, 0);
    Node& nb = in(self, 1);
    if (na.requires_grad) {
      auto g = na.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * nb.value[i];
    }
    if (nb.requires_grad) {
      auto g = nb.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * na.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  auto out = unary("scale", a, [factor](double v) { return v * factor; });
  if (out.requires_grad())
    out.node().backward = [factor](Node& self) {
      auto g = in(self, 0).ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
    };
  return out;
}

Tensor tanh(const Tensor& a) {
  auto out = unary("tanh", a, [](double v) { return std::tanh(v); });
  if (out.requires_grad())
    out.node().backward = [](Node& self) {
      auto g = in(self, 0).ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] += self.grad[i] * (1.0 - self.value[i] * self.value[i]);
    };
  return out;
}

Tensor sigmoid(const Tensor& a) {
  auto out = unary("sigmoid", a, [](double v) {
    // Split by sign so exp never overflows.
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  if (out.requires_grad())
    out.node().backward = [](Node& self) {
      auto g = in(self, 0).ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] += self.grad[i] * self.value[i] * (1.0 - self.value[i]);
    };
  return out;
}

Tensor relu(const Tensor& a) {
  auto out = unary("relu", a, [](double v) { return v < 0 ? 0.0 : v; });
  if (out.requires_grad())
    out.node().backward = [](Node& self) {
      auto g = in(self, 0).ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        if (self.value[i] > 0) g[i] += self.grad[i];
    };
  return out;
}

Tensor scale_cols(const Tensor& a, std::span<const double> factors) {
  require_rank("scale_cols", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (factors.size() != n) shape_error("scale_cols", a.shape(), Shape{factors.size()});
  std::vector<double> f(factors.begin(), factors.end());
  std::vector<double> z(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) z[i * n + j] *= f[j];
  return make_result("scale_cols", a.shape(), std::move(z), {a},
                     [f = std::move(f), m, n](Node& self) {
                       auto g = in(self, 0).ensure_grad();
                       for (std::size_t i = 0; i < m; ++i)
                         for (std::size_t j = 0; j < n; ++j)
                           g[i * n + j] += self.grad[i * n + j] * f[j];
                     });
}

Tensor dropout(const Tensor& a, double p, bool train, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout: probability must be in [0, 1)");
  if (!train || p == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(a.numel());
  for (auto& m : mask) m = uniform01(rng) < p ? 0.0 : keep_scale;
  std::vector<double> z(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] *= mask[i];
  return make_result("dropout", a.shape(), std::move(z), {a}, [mask = std::move(mask)](Node& self) {
    auto g = in(self, 0).ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * mask[i];
  });
}

// -- structure -------------------------------------------------------------

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t m = parts[0].dim(0);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_rank("concat_cols", p, 2);
    if (p.dim(0) != m) shape_error("concat_cols", parts[0].shape(), p.shape());
    widths.push_back(p.dim(1));
    total += p.dim(1);
  }
  std::vector<double> z(m * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto v = parts[k].values();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(v.data() + i * widths[k], widths[k], z.data() + i * total + offset);
    offset += widths[k];
  }
  return make_result("concat_cols", {m, total}, std::move(z), parts,
                     [widths, m, total](Node& self) {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         Node& nk = in(self, k);
                         if (nk.requires_grad) {
                           auto g = nk.ensure_grad();
                           for (std::size_t i = 0; i < m; ++i)
                             for (std::size_t j = 0; j < widths[k]; ++j)
                               g[i * widths[k] + j] += self.grad[i * total + off + j];
                         }
                         off += widths[k];
                       }
                     });
}

Tensor stack_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("stack_rows: no inputs");
  for (const auto& p : parts) {
    require_rank("stack_rows", p, 2);
    if (p.shape() != parts[0].shape()) shape_error("stack_rows", parts[0].shape(), p.shape());
  }
  const std::size_t m = parts[0].dim(0), n = parts[0].dim(1), k = parts.size();
  std::vector<double> z(m * k * n);
  for (std::size_t p = 0; p < k; ++p) {
    const auto v = parts[p].values();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(v.data() + i * n, n, z.data() + (i * k + p) * n);
  }
  return make_result("stack_rows", {m, k, n}, std::move(z), parts, [m, k, n](Node& self) {
    for (std::size_t p = 0; p < k; ++p) {
      Node& np = in(self, p);
      if (!np.requires_grad) continue;
      auto g = np.ensure_grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[(i * k + p) * n + j];
    }
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel(shape) != a.numel()) shape_error("reshape", a.shape(), shape);
  std::vector<double> z(a.values().begin(), a.values().end());
  return make_result("reshape", std::move(shape), std::move(z), {a},
                     [](Node& self) { in(self, 0).accumulate(self.grad); });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank("slice_cols", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (begin > end || end > n)
    shape_error("slice_cols", a.shape(),
                "column range [" + std::to_string(begin) + ", " + std::to_string(end) + ")");
  const std::size_t w = end - begin;
  std::vector<double> z(m * w);
  const auto v = a.values();
  for (std::size_t i = 0; i < m; ++i) std::copy_n(v.data() + i * n + begin, w, z.data() + i * w);
  return make_result("slice_cols", {m, w}, std::move(z), {a}, [m, n, w, begin](Node& self) {
    auto g = in(self, 0).ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) g[i * n + begin + j] += self.grad[i * w + j];
  });
}

// -- sparse row access -----------------------------------------------------

Tensor gather_rows(const Tensor& table, std::span<const std::size_t> index) {
  require_rank("gather_rows", table, 2);
  const std::size_t rows = table.dim(0), n = table.dim(1);
  std::vector<std::size_t> idx(index.begin(), index.end());
  std::vector<double> z(idx.size() * n);
  const auto v = table.values();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= rows)
      throw ShapeError("gather_rows: index " + std::to_string(idx[i]) + " out of range for " +
                       to_string(table.shape()));
    std::copy_n(v.data() + idx[i] * n, n, z.data() + i * n);
  }
  const std::size_t m = idx.size();
  return make_result("gather_rows", {m, n}, std::move(z), {table},
                     [idx = std::move(idx), n](Node& self) {
                       Node& t = in(self, 0);
                       if (t.leaf && t.sparse_grad) {
                         for (std::size_t i = 0; i < idx.size(); ++i) {
                           auto row = t.sparse.row(idx[i]);
                           for (std::size_t j = 0; j < n; ++j) row[j] += self.grad[i * n + j];
                         }
                         return;
                       }
                       auto g = t.ensure_grad();
                       for (std::size_t i = 0; i < idx.size(); ++i)
                         for (std::size_t j = 0; j < n; ++j)
                           g[idx[i] * n + j] += self.grad[i * n + j];
                     });
}

Tensor scatter_add_rows(const Tensor& a, std::span<const std::size_t> index, std::size_t rows) {
  require_rank("scatter_add_rows", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (index.size() != m) shape_error("scatter_add_rows", a.shape(), Shape{index.size()});
  std::vector<std::size_t> idx(index.begin(), index.end());
  std::vector<double> z(rows * n, 0.0);
  const auto v = a.values();
  for (std::size_t i = 0; i < m; ++i) {
    if (idx[i] >= rows)
      throw ShapeError("scatter_add_rows: index " + std::to_string(idx[i]) + " out of range for " +
                       std::to_string(rows) + " rows");
    for (std::size_t j = 0; j < n; ++j) z[idx[i] * n + j] += v[i * n + j];
  }
  return make_result("scatter_add_rows", {rows, n}, std::move(z), {a},
                     [idx = std::move(idx), n](Node& self) {
                       auto g = in(self, 0).ensure_grad();
                       for (std::size_t i = 0; i < idx.size(); ++i)
                         for (std::size_t j = 0; j < n; ++j)
                           g[i * n + j] += self.grad[idx[i] * n + j];
                     });
}

Tensor row_dot(const Tensor& a, const Tensor& b) {
  require_rank("row_dot", a, 2);
  require_same("row_dot", a, b);
  const std::size_t m = a.dim(0), n = a.dim(1);
  const auto x = a.values(), y = b.values();
  std::vector<double> z(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) z[i] += x[i * n + j] * y[i * n + j];
  return make_result("row_dot", {m}, std::move(z), {a, b}, [m, n](Node& self) {
    Node& na = in(self, 0);
    Node& nb = in(self, 1);
    if (na.requires_grad) {
      auto g = na.ensure_grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i] * nb.value[i * n + j];
    }
    if (nb.requires_grad) {
      auto g = nb.ensure_grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i] * na.value[i * n + j];
    }
  });
}

Tensor scale_rows(const Tensor& a, const Tensor& w) {
  require_rank("scale_rows", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (w.numel() != m) shape_error("scale_rows", a.shape(), w.shape());
  const auto x = a.values(), s = w.values();
  std::vector<double> z(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) z[i * n + j] = x[i * n + j] * s[i];
  return make_result("scale_rows", a.shape(), std::move(z), {a, w}, [m, n](Node& self) {
    Node& na = in(self, 0);
    Node& nw = in(self, 1);
    if (na.requires_grad) {
      auto g = na.ensure_grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i * n + j] * nw.value[i];
    }
    if (nw.requires_grad) {
      auto g = nw.ensure_grad();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i] += self.grad[i * n + j] * na.value[i * n + j];
    }
  });
}

// -- normalisation ---------------------------------------------------------

namespace {

void softmax_range(std::span<const double> x, std::span<double> y) {
  if (x.empty()) return;
  const double mx = *std::max_element(x.begin(), x.end());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += (y[i] = std::exp(x[i] - mx));
  for (auto& v : y) v /= total;
}

void softmax_range_backward(std::span<const double> y, std::span<const double> gy,
                            std::span<double> gx) {
  double dot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) dot += gy[i] * y[i];
  for (std::size_t i = 0; i < y.size(); ++i) gx[i] += y[i] * (gy[i] - dot);
}

}  // namespace

Tensor softmax_rows(const Tensor& a) {
  require_rank("softmax_rows", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> z(m * n);
  const auto x = a.values();
  for (std::size_t i = 0; i < m; ++i)
    softmax_range(x.subspan(i * n, n), std::span<double>(z).subspan(i * n, n));
  return make_result("softmax_rows", a.shape(), std::move(z), {a}, [m, n](Node& self) {
    auto g = in(self, 0).ensure_grad();
    const std::span<const double> y = self.value, gy = self.grad;
    for (std::size_t i = 0; i < m; ++i)
      softmax_range_backward(y.subspan(i * n, n), gy.subspan(i * n, n), g.subspan(i * n, n));
  });
}

Tensor segment_softmax(const Tensor& a, std::span<const std::size_t> offsets) {
  require_rank("segment_softmax", a, 1);
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != a.numel())
    shape_error("segment_softmax", a.shape(), "offsets spanning [0, numel]");
  std::vector<std::size_t> off(offsets.begin(), offsets.end());
  for (std::size_t s = 0; s + 1 < off.size(); ++s)
    if (off[s] > off[s + 1]) throw ShapeError("segment_softmax: offsets must be non-decreasing");
  std::vector<double> z(a.numel());
  const auto x = a.values();
  for (std::size_t s = 0; s + 1 < off.size(); ++s)
    softmax_range(x.subspan(off[s], off[s + 1] - off[s]),
                  std::span<double>(z).subspan(off[s], off[s + 1] - off[s]));
  return make_result("segment_softmax", a.shape(), std::move(z), {a},
                     [off = std::move(off)](Node& self) {
                       auto g = in(self, 0).ensure_grad();
                       const std::span<const double> y = self.value, gy = self.grad;
                       for (std::size_t s = 0; s + 1 < off.size(); ++s) {
                         const std::size_t len = off[s + 1] - off[s];
                         softmax_range_backward(y.subspan(off[s], len), gy.subspan(off[s], len),
                                                g.subspan(off[s], len));
                       }
                     });
}

// -- convolution -----------------------------------------------------------

Tensor conv1d_two_row(const Tensor& x, const Tensor& kernels) {
  require_rank("conv1d_two_row", x, 3);
  require_rank("conv1d_two_row", kernels, 3);
  if (x.dim(1) != 2) shape_error("conv1d_two_row", x.shape(), "[batch, 2, dim]");
  if (kernels.dim(1) != 2 || kernels.dim(2) % 2 == 0)
    shape_error("conv1d_two_row", kernels.shape(), "[channels, 2, odd width]");
  const std::size_t batch = x.dim(0), dim = x.dim(2), channels = kernels.dim(0),
                    width = kernels.dim(2);
  std::vector<double> y(batch * channels * dim);
  kernels::conv1d_two_row(x.values(), kernels.values(), y, batch, dim, channels, width);
  return make_result("conv1d_two_row", {batch, channels * dim}, std::move(y), {x, kernels},
                     [batch, dim, channels, width](Node& self) {
                       Node& nx = in(self, 0);
                       Node& nw = in(self, 1);
                       std::span<double> dx, dw;
                       if (nx.requires_grad) dx = nx.ensure_grad();
                       if (nw.requires_grad) dw = nw.ensure_grad();
                       kernels::conv1d_two_row_backward(nx.value, nw.value, self.grad, dx, dw,
                                                        batch, dim, channels, width);
                     });
}

// -- reductions and losses ---------------------------------------------------

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return make_result("sum", {}, {s}, {a}, [](Node& self) {
    auto g = in(self, 0).ensure_grad();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw ShapeError("mean: empty tensor");
  const double n = static_cast<double>(a.numel());
  double s = 0.0;
  for (double v : a.values()) s += v;
  return make_result("mean", {}, {s / n}, {a}, [n](Node& self) {
    auto g = in(self, 0).ensure_grad();
    for (auto& v : g) v += self.grad[0] / n;
  });
}

Tensor sum_squares(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return make_result("sum_squares", {}, {s}, {a}, [](Node& self) {
    Node& na = in(self, 0);
    auto g = na.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * na.value[i] * self.grad[0];
  });
}

Tensor binary_cross_entropy(const Tensor& probs, const Tensor& targets) {
  require_same("binary_cross_entropy", probs, targets);
  if (probs.numel() == 0) throw ShapeError("binary_cross_entropy: empty tensor");
  const auto p = probs.values(), t = targets.values();
  const double n = static_cast<double>(p.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kProbClamp, 1.0 - kProbClamp);
    s -= t[i] * std::log(q) + (1.0 - t[i]) * std::log(1.0 - q);
  }
  return make_result("binary_cross_entropy", {}, {s / n}, {probs, targets}, [n](Node& self) {
    Node& np = in(self, 0);
    Node& nt = in(self, 1);
    if (np.requires_grad) {
      auto g = np.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double q = np.value[i];
        if (q < kProbClamp || q > 1.0 - kProbClamp) continue;  // flat region of the clamp
        g[i] -= self.grad[0] * (nt.value[i] / q - (1.0 - nt.value[i]) / (1.0 - q)) / n;
      }
    }
    if (nt.requires_grad) {
      auto g = nt.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double q = std::clamp(np.value[i], kProbClamp, 1.0 - kProbClamp);
        g[i] -= self.grad[0] * (std::log(q) - std::log(1.0 - q)) / n;
      }
    }
  });
}

}  // namespace kgc
