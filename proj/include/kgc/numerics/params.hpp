#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "kgc/numerics/tensor.hpp"

namespace kgc {

struct NamedParameter {
  std::string name;
  Tensor tensor;
  /// Included in the L2 penalty.
  bool regularized = false;
};

/// Ordered collection of trainable leaves. Order is insertion order and is
/// what the optimizer, checkpoints and gradient norms iterate over.
class ParameterSet {
 public:
  Tensor& add(std::string name, Tensor tensor, bool regularized);
  bool contains(std::string_view name) const;
  Tensor& get(std::string_view name);
  const Tensor& get(std::string_view name) const;

  std::vector<NamedParameter>& items() { return items_; }
  const std::vector<NamedParameter>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }

  void zero_grad();
  /// Deep copy of the values, without gradients.
  ParameterSet snapshot() const;
  /// Overwrites values from a set with identical names and shapes.
  void assign(const ParameterSet& other);

 private:
  std::vector<NamedParameter> items_;
};

}  // namespace kgc
