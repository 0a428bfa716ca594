#pragma once

#include <cmath>
#include <cstddef>

#include "noisemix/errors.hpp"

namespace noisemix {

/// Uniform grid t_n = n * step, n = 0..count (units of 1/omega).
struct TimeGrid {
  double step = 1e-3;
  std::size_t count = 8000;

  static TimeGrid from_horizon(double step, double horizon) {
    if (!(step > 0.0)) throw ValidationError("dt", "step must be positive");
    if (!(horizon > 0.0)) throw ValidationError("horizon", "horizon must be positive");
    const auto n = static_cast<std::size_t>(std::llround(horizon / step));
    return {step, n < 1 ? 1 : n};
  }

  double time(std::size_t n) const { return static_cast<double>(n) * step; }
  double horizon() const { return time(count); }
  std::size_t size() const { return count + 1; }

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("dt", "step must be positive");
    if (count < 1) throw ValidationError("horizon", "grid needs at least one step");
  }

  /// Integer ratio `coarse.step / step` when `coarse` samples this grid at a
  /// subset of nodes over a horizon no longer than ours; 0 otherwise.
  std::size_t coarsening_factor(const TimeGrid& coarse) const {
    const double ratio = coarse.step / step;
    const auto k = static_cast<std::size_t>(std::llround(ratio));
    if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * ratio) return 0;
    if (coarse.count * k > count) return 0;
    return k;
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

}  // namespace noisemix
