#include "kgc/numerics/params.hpp"

#include <algorithm>

#include "kgc/error.hpp"

namespace kgc {

Tensor& ParameterSet::add(std::string name, Tensor tensor, bool regularized) {
  if (contains(name)) throw ConfigError("duplicate parameter '" + name + "'");
  items_.push_back({std::move(name), std::move(tensor), regularized});
  return items_.back().tensor;
}

bool ParameterSet::contains(std::string_view name) const {
  return std::any_of(items_.begin(), items_.end(), [&](const auto& p) { return p.name == name; });
}

Tensor& ParameterSet::get(std::string_view name) {
  for (auto& p : items_)
    if (p.name == name) return p.tensor;
  throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

const Tensor& ParameterSet::get(std::string_view name) const {
  return const_cast<ParameterSet*>(this)->get(name);
}

void ParameterSet::zero_grad() {
  for (auto& p : items_) p.tensor.zero_grad();
}

ParameterSet ParameterSet::snapshot() const {
  ParameterSet copy;
  for (const auto& p : items_) {
    const auto v = p.tensor.values();
    copy.add(p.name,
             Tensor::parameter(p.tensor.shape(), std::vector<double>(v.begin(), v.end()),
                               p.tensor.has_sparse_grad()),
             p.regularized);
  }
  return copy;
}

void ParameterSet::assign(const ParameterSet& other) {
  for (auto& p : items_) {
    const Tensor& src = other.get(p.name);
    if (src.shape() != p.tensor.shape())
      throw ShapeError("assign: parameter '" + p.name + "' has shape " +
                       to_string(p.tensor.shape()) + ", source " + to_string(src.shape()));
    std::ranges::copy(src.values(), p.tensor.mutable_values().begin());
  }
}

}  // namespace kgc
