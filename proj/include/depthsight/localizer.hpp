// Copyright 2026 the depthsight authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "depthsight/box.hpp"
#include "depthsight/depthmap.hpp"
#include "depthsight/detector.hpp"
#include "depthsight/errors.hpp"
#include "depthsight/geometry.hpp"
#include "depthsight/stats.hpp"

namespace depthsight {

/// How the reference depth inside a bounding box is chosen.
///   kMinDepth:      Z_ref = min(Z)
///   kMeanBelowQ1:   Z_ref = mean of {Z_i : Z_i < Q1}
///   kMedianBelowQ1: Z_ref = median of {Z_i : Z_i < Q1}
/// Q1 is the first quartile of the valid in-box depths, by linear
/// interpolation at sorted rank (n-1)/4. When no depth lies strictly below
/// Q1 (tiny or heavily tied samples), the candidate set falls back to
/// {min(Z)}.
enum class ZrefMethod { kMinDepth, kMeanBelowQ1, kMedianBelowQ1 };

inline std::string to_string(ZrefMethod m) {
  switch (m) {
    case ZrefMethod::kMinDepth: return "min";
    case ZrefMethod::kMeanBelowQ1: return "meanq1";
    case ZrefMethod::kMedianBelowQ1: return "medianq1";
  }
  throw InternalError("unreachable ZrefMethod");
}

inline ZrefMethod zref_method_from_string(const std::string& s) {
  if (s == "min") return ZrefMethod::kMinDepth;
  if (s == "meanq1") return ZrefMethod::kMeanBelowQ1;
  if (s == "medianq1") return ZrefMethod::kMedianBelowQ1;
  throw ConfigError("unknown z_ref method '" + s + "' (want min|meanq1|medianq1)");
}

/// The representative 2D point of a box: the valid pixel whose depth is
/// nearest Z_ref (ties broken by row-major order, first wins).
struct SelectedPoint {
  int u = 0;
  int v = 0;
  double z_ref = 0;  // the method's reference depth
  double depth = 0;  // the actual depth at (u, v); what gets reprojected
};

inline SelectedPoint select_point(const DepthMap& m, const PixelBox& box,
                                  ZrefMethod method) {
  const PixelBox b = clamp_to_image(box, m.width(), m.height());

  // Valid in-box depths in row-major order.
  std::vector<double> depths;
  std::vector<int> xs, ys;
  for (int y = b.y; y < b.bottom(); ++y) {
    for (int x = b.x; x < b.right(); ++x) {
      const double z = m.at(x, y);
      if (DepthMap::is_valid(z)) {
        depths.push_back(z);
        xs.push_back(x);
        ys.push_back(y);
      }
    }
  }
  if (depths.empty()) throw NoDepthInBox("box contains no valid depth");

  std::vector<double> sorted = depths;
  std::sort(sorted.begin(), sorted.end());

  double z_ref = 0;
  if (method == ZrefMethod::kMinDepth) {
    z_ref = sorted.front();
  } else {
    const double q1 = quantile_sorted(sorted, 0.25);
    // Strictly-below-Q1 prefix of the sorted sample.
    const auto end = std::lower_bound(sorted.begin(), sorted.end(), q1);
    const auto count = static_cast<std::size_t>(end - sorted.begin());
    const std::span<const double> candidates =
        count > 0 ? std::span<const double>(sorted.data(), count)
                  : std::span<const double>(sorted.data(), 1);  // {min(Z)}
    z_ref = method == ZrefMethod::kMeanBelowQ1 ? mean(candidates)
                                               : median_sorted(candidates);
  }

  std::size_t best = 0;
  double best_dist = std::abs(depths[0] - z_ref);
  for (std::size_t i = 1; i < depths.size(); ++i) {
    const double dist = std::abs(depths[i] - z_ref);
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return SelectedPoint{xs[best], ys[best], z_ref, depths[best]};
}

struct LocalizedDetection {
  Detection detection;
  int u = 0;
  int v = 0;
  double z_ref = 0;
  Point3D position;
};

/// Pick the representative pixel of a detection and reproject it to 3D.
/// The reprojected depth is the selected pixel's measured depth (the
/// disparity is recovered from it), so position.z equals that depth up to
/// round-off.
inline LocalizedDetection localize(const DepthMap& m, const Detection& det,
                                   const StereoRig& rig, ZrefMethod method) {
  const SelectedPoint sel = select_point(m, det.box, method);
  const double d = depth_to_disparity(rig, sel.depth);
  const Point3D pos = reproject(rig, sel.u, sel.v, d);
  return LocalizedDetection{det, sel.u, sel.v, sel.z_ref, pos};
}

}  // namespace depthsight
