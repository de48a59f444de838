#include "kgc/train/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kgc/error.hpp"
#include "kgc/numerics/ops.hpp"

namespace kgc {

double MaskSchedule::visible_fraction(std::size_t epoch) const {
  if (horizon == 0) throw ConfigError("mask horizon must be positive");
  const double f =
      epoch >= horizon ? 1.0 : static_cast<double>(epoch) / static_cast<double>(horizon);
  return mode == MaskMode::Reveal ? f : 1.0 - f;
}

std::size_t visible_count(const MaskSchedule& schedule, std::size_t epoch, std::size_t dims,
                          Rng& rng) {
  const double target = schedule.visible_fraction(epoch) * static_cast<double>(dims);
  const double whole = std::floor(target);
  const double frac = target - whole;
  auto n = static_cast<std::size_t>(whole);
  if (frac > 0.0 && uniform01(rng) < frac) ++n;
  return std::min(n, dims);
}

std::vector<double> draw_mask(const MaskSchedule& schedule, std::size_t epoch, std::size_t dims,
                              Rng& rng) {
  const std::size_t visible = visible_count(schedule, epoch, dims, rng);
  std::vector<double> mask(dims, 0.0);
  if (visible == dims) {
    std::fill(mask.begin(), mask.end(), 1.0);
    return mask;
  }
  std::vector<std::size_t> order(dims);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = 0; i < visible; ++i) {
    std::swap(order[i], order[i + uniform_index(rng, dims - i)]);
    mask[order[i]] = 1.0;
  }
  return mask;
}

Tensor progressive_mask(const Tensor& text, std::size_t epoch, const MaskSchedule& schedule,
                        bool train, Rng& rng) {
  if (!train) return text;
  if (text.rank() != 2) throw ShapeError("progressive_mask: expected a 2-D text representation");
  const auto mask = draw_mask(schedule, epoch, text.dim(1), rng);
  return scale_cols(text, mask);
}

}  // namespace kgc
