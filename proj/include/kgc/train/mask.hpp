#pragma once

#include <cstddef>
#include <vector>

#include "kgc/numerics/tensor.hpp"
#include "kgc/rng.hpp"
#include "kgc/train/config.hpp"

namespace kgc {

/// Share of text dimensions left visible at a given (0-based) epoch.
///
/// Reveal: f = min(epoch / horizon, 1), so training starts from an all-zeros
/// mask and reaches the all-ones mask at the horizon, where it stays.
/// Hide: 1 - f, the opposite ramp.
struct MaskSchedule {
  std::size_t horizon = 100;
  MaskMode mode = MaskMode::Reveal;

  double visible_fraction(std::size_t epoch) const;
};

/// Number of visible dimensions out of `dims`. f * dims is used as is when it
/// is an integer; otherwise it is rounded up with probability equal to its
/// fractional part, so the expectation is exactly f * dims.
std::size_t visible_count(const MaskSchedule& schedule, std::size_t epoch, std::size_t dims,
                          Rng& rng);

/// 0/1 mask over `dims` columns with visible_count ones at positions drawn
/// uniformly without replacement.
std::vector<double> draw_mask(const MaskSchedule& schedule, std::size_t epoch, std::size_t dims,
                              Rng& rng);

/// Multiplies every row of the text representation by a freshly drawn mask.
/// Outside training the input is returned unchanged.
Tensor progressive_mask(const Tensor& text, std::size_t epoch, const MaskSchedule& schedule,
                        bool train, Rng& rng);

}  // namespace kgc
