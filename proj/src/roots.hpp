#pragma once

#include <cmath>

namespace platoon::detail {

/// Bisection for a monotone function on [lo, hi] whose values at the ends
/// bracket `target`. Runs until the bracket collapses to adjacent doubles.
template <class F>
double bisect(F&& fn, double target, double lo, double hi) {
  const bool increasing = fn(hi) > fn(lo);
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const bool below = fn(mid) < target;
    if (below == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(fn(lo) - target) <= std::abs(fn(hi) - target) ? lo : hi;
}

}  // namespace platoon::detail
