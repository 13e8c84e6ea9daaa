#pragma once

#include <cstddef>
#include <span>

namespace sdde::detail {

// Pairwise summation: O(log n) error growth and a fixed association order,
// so aggregates do not depend on thread scheduling.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

inline double pairwise_mean(std::span<const double> x) {
  return x.empty() ? 0.0 : pairwise_sum(x) / static_cast<double>(x.size());
}

}  // namespace sdde::detail
