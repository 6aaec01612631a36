// Copyright 2026 the depthsight authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "depthsight/errors.hpp"

namespace depthsight {

/// Quantile of an ascending sample by linear interpolation at rank (n-1)*q.
/// q in [0, 1]. This is the estimator used everywhere in the library
/// (first quartile, background percentile).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InternalError("quantile_sorted: empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, q);
}

/// Median of an ascending sample: middle element, or the mean of the two
/// middle elements for even sizes.
inline double median_sorted(std::span<const double> sorted) {
  if (sorted.empty()) throw InternalError("median_sorted: empty sample");
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

inline double mean(std::span<const double> values) {
  if (values.empty()) throw InternalError("mean: empty sample");
  const double sum = std::accumulate(values.begin(), values.end(), 0.0);
  return sum / static_cast<double>(values.size());
}

}  // namespace depthsight
