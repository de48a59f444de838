#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace kgc {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Gradient of a row table touched only through gather_rows: rows are stored
/// on first touch, keyed by row index.
class SparseRowGrad {
 public:
  explicit SparseRowGrad(std::size_t width = 0) : width_(width) {}

  /// Zero-initialised on first access.
  std::span<double> row(std::size_t r);
  std::span<const double> slot(std::size_t s) const;
  std::span<double> slot(std::size_t s);

  const std::vector<std::size_t>& rows() const { return rows_; }
  std::size_t width() const { return width_; }
  bool empty() const { return rows_.empty(); }
  void clear();

 private:
  std::size_t width_;
  std::vector<std::size_t> rows_;
  std::unordered_map<std::size_t, std::size_t> slot_of_;
  std::vector<double> values_;
};

namespace detail {

struct Node {
  std::string op;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  SparseRowGrad sparse;
  bool requires_grad = false;
  bool sparse_grad = false;
  bool leaf = true;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the inputs.
  std::function<void(Node&)> backward;

  std::span<double> ensure_grad();
  void accumulate(std::span<const double> g);
};

}  // namespace detail

/// Dense row-major array of doubles carrying an optional reverse-mode tape.
///
/// A Tensor is a shared handle: copies alias the same storage. Ops produce new
/// tensors; only leaves (parameters and constants) may be mutated in place.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor from_values(Shape shape, std::vector<double> values);
  /// A trainable leaf. With sparse_grad, gradients arriving through
  /// gather_rows are kept per row instead of densely.
  static Tensor parameter(Shape shape, std::vector<double> values, bool sparse_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;
  const std::string& op() const;

  std::span<const double> values() const;
  /// Leaf only.
  std::span<double> mutable_values();
  double item() const;
  double at(std::size_t i, std::size_t j) const;

  bool requires_grad() const;
  bool is_leaf() const;
  bool has_sparse_grad() const;
  /// Dense gradient; empty when nothing has been accumulated.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  const SparseRowGrad& sparse_grad() const;
  SparseRowGrad& mutable_sparse_grad();
  void zero_grad();

  /// Reverse pass from a scalar. Each reachable node runs its backward rule
  /// exactly once, in reverse topological order.
  void backward() const;

  /// Value copy with no history.
  Tensor detach() const;

  detail::Node& node() const;
  std::shared_ptr<detail::Node> node_ptr() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Disables tape recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

}  // namespace kgc
