#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgc/numerics/params.hpp"

namespace kgc {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamSlot {
  std::vector<double> m;
  std::vector<double> v;
};

/// Adam with bias correction.
///
/// Parameters with a dense gradient are updated everywhere. Row tables whose
/// gradient arrived only through gather_rows are updated on the touched rows
/// alone (lazy moments), so untouched rows stay bit-identical.
class Adam {
 public:
  /// Rejects a negative or non-finite learning rate; lr == 0 is a frozen step.
  explicit Adam(AdamOptions options);

  void step(ParameterSet& params);

  const AdamOptions& options() const { return options_; }
  std::int64_t steps() const { return steps_; }
  void set_steps(std::int64_t t) { steps_ = t; }
  std::unordered_map<std::string, AdamSlot>& state() { return state_; }
  const std::unordered_map<std::string, AdamSlot>& state() const { return state_; }

 private:
  AdamOptions options_;
  std::int64_t steps_ = 0;
  std::unordered_map<std::string, AdamSlot> state_;
};

/// Global L2 norm over every dense and row-sparse gradient in the set.
double grad_norm(const ParameterSet& params);

/// Rescales all gradients by max_norm / norm when the global norm exceeds
/// max_norm. Returns the norm measured before clipping.
double clip_grad_norm(ParameterSet& params, double max_norm);

}  // namespace kgc
