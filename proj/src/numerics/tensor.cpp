#include "kgc/numerics/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "kgc/error.hpp"

namespace kgc {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::span<double> SparseRowGrad::row(std::size_t r) {
  auto [it, inserted] = slot_of_.try_emplace(r, rows_.size());
  if (inserted) {
    rows_.push_back(r);
    values_.resize(values_.size() + width_, 0.0);
  }
  return slot(it->second);
}

std::span<const double> SparseRowGrad::slot(std::size_t s) const {
  return {values_.data() + s * width_, width_};
}

std::span<double> SparseRowGrad::slot(std::size_t s) {
  return {values_.data() + s * width_, width_};
}

void SparseRowGrad::clear() {
  rows_.clear();
  slot_of_.clear();
  values_.clear();
}

namespace detail {

std::span<double> Node::ensure_grad() {
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad;
}

void Node::accumulate(std::span<const double> g) {
  auto dst = ensure_grad();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
}

}  // namespace detail

namespace {
thread_local bool g_grad_enabled = true;

std::shared_ptr<detail::Node> make_leaf(Shape shape, std::vector<double> values) {
  if (values.size() != numel(shape))
    throw ShapeError("tensor: " + std::to_string(values.size()) + " values for shape " +
                     to_string(shape));
  auto n = std::make_shared<detail::Node>();
  n->op = "leaf";
  n->shape = std::move(shape);
  n->value = std::move(values);
  return n;
}
}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const auto n = kgc::numel(shape);
  return Tensor(make_leaf(std::move(shape), std::vector<double>(n, value)));
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values) {
  return Tensor(make_leaf(std::move(shape), std::move(values)));
}

Tensor Tensor::parameter(Shape shape, std::vector<double> values, bool sparse_grad) {
  auto n = make_leaf(std::move(shape), std::move(values));
  n->op = "parameter";
  n->requires_grad = true;
  n->sparse_grad = sparse_grad;
  if (sparse_grad) {
    if (n->shape.size() != 2) throw ShapeError("parameter: sparse gradient needs a 2-D table");
    n->sparse = SparseRowGrad(n->shape[1]);
  }
  return Tensor(std::move(n));
}

detail::Node& Tensor::node() const {
  if (!node_) throw Error("use of undefined tensor");
  return *node_;
}

const Shape& Tensor::shape() const { return node().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size())
    throw ShapeError("dim: axis " + std::to_string(axis) + " out of range for " + to_string(s));
  return s[axis];
}

std::size_t Tensor::numel() const { return node().value.size(); }
const std::string& Tensor::op() const { return node().op; }
std::span<const double> Tensor::values() const { return node().value; }

std::span<double> Tensor::mutable_values() {
  if (!node().leaf) throw Error("mutable_values: tensor produced by '" + op() + "' is not a leaf");
  return node().value;
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeError("item: tensor of shape " + to_string(shape()));
  return node().value[0];
}

double Tensor::at(std::size_t i, std::size_t j) const {
  if (rank() != 2) throw ShapeError("at: expected 2-D, got " + to_string(shape()));
  return node().value[i * shape()[1] + j];
}

bool Tensor::requires_grad() const { return node().requires_grad; }
bool Tensor::is_leaf() const { return node().leaf; }
bool Tensor::has_sparse_grad() const { return node().sparse_grad; }
std::span<const double> Tensor::grad() const { return node().grad; }
std::span<double> Tensor::mutable_grad() { return node().ensure_grad(); }
const SparseRowGrad& Tensor::sparse_grad() const { return node().sparse; }
SparseRowGrad& Tensor::mutable_sparse_grad() { return node().sparse; }

void Tensor::zero_grad() {
  auto& n = node();
  std::fill(n.grad.begin(), n.grad.end(), 0.0);
  n.sparse.clear();
}

Tensor Tensor::detach() const { return from_values(shape(), node().value); }

void Tensor::backward() const {
  auto& root = node();
  if (root.value.size() != 1)
    throw ShapeError("backward: root must be a scalar, got " + to_string(root.shape));
  if (!root.requires_grad) return;

  // Iterative post-order DFS; `order` ends up topologically sorted.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{&root, 0}};
  seen.insert(&root);
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      detail::Node* child = n->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  for (auto* n : order)
    if (!n->leaf) n->grad.assign(n->value.size(), 0.0);
  root.ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto* n = *it;
    if (!n->leaf && n->backward) n->backward(*n);
  }
}

}  // namespace kgc
