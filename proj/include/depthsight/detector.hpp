// Copyright 2026 the depthsight authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "depthsight/box.hpp"
#include "depthsight/depthmap.hpp"
#include "depthsight/errors.hpp"
#include "depthsight/stats.hpp"

namespace depthsight {

enum class DetectionSource { kNative, kExternal };

struct Detection {
  PixelBox box;
  double confidence = 0;  // [0, 1]
  DetectionSource source = DetectionSource::kNative;
};

/// Depth-contrast detector parameters. A flying object shows up nearer than
/// the background by at least contrast_threshold meters; the background
/// level is a global percentile of the valid depths.
struct DetectorParams {
  double contrast_threshold = 1.0;    // meters
  double background_percentile = 90;  // [0, 100]
  int min_area = 9;                   // pixels^2
  double max_area_fraction = 0.25;    // of the whole image
  double confidence_scale = 5.0;      // meters of contrast mapping to confidence 1

  void validate() const {
    if (!(contrast_threshold > 0)) throw ConfigError("detector: contrast_threshold must be > 0");
    if (background_percentile < 0 || background_percentile > 100)
      throw ConfigError("detector: background_percentile outside [0, 100]");
    if (min_area < 1) throw ConfigError("detector: min_area must be >= 1");
    if (max_area_fraction <= 0 || max_area_fraction > 1)
      throw ConfigError("detector: max_area_fraction outside (0, 1]");
    if (!(confidence_scale > 0)) throw ConfigError("detector: confidence_scale must be > 0");
  }
};

struct ForegroundResult {
  std::vector<std::uint8_t> mask;  // row-major, 1 = foreground
  double background_level = 0;     // the percentile depth
};

/// Pixels nearer than background_percentile(valid depths) - contrast_threshold.
inline ForegroundResult foreground_mask(const DepthMap& m, const DetectorParams& params) {
  params.validate();
  std::vector<double> valid;
  valid.reserve(m.data().size());
  for (const double z : m.data()) {
    if (DepthMap::is_valid(z)) valid.push_back(z);
  }
  if (valid.empty()) throw NoValidDepth("depth map has no valid pixels");
  std::sort(valid.begin(), valid.end());
  const double level = quantile_sorted(valid, params.background_percentile / 100.0);

  ForegroundResult r;
  r.background_level = level;
  r.mask.assign(static_cast<std::size_t>(m.width()) * m.height(), 0);
  const double cutoff = level - params.contrast_threshold;
  std::size_t i = 0;
  for (const double z : m.data()) {
    if (DepthMap::is_valid(z) && z < cutoff) r.mask[i] = 1;
    ++i;
  }
  return r;
}

/// Depth-contrast detection: 4-connected components of the foreground mask,
/// filtered by area, one Detection per surviving component. Box is the tight
/// rectangle; confidence = clamp((B - median component depth) / kappa, 0, 1).
/// Output sorted by descending confidence (stable).
inline std::vector<Detection> detect(const DepthMap& m, const DetectorParams& params) {
  const ForegroundResult fg = foreground_mask(m, params);
  const int w = m.width(), h = m.height();
  const double max_area = params.max_area_fraction * static_cast<double>(w) * h;

  std::vector<std::uint8_t> seen(fg.mask.size(), 0);
  std::vector<std::size_t> stack;
  std::vector<double> component_depths;
  std::vector<Detection> out;

  for (std::size_t start = 0; start < fg.mask.size(); ++start) {
    if (!fg.mask[start] || seen[start]) continue;
    component_depths.clear();
    stack.assign(1, start);
    seen[start] = 1;
    int min_x = w, min_y = h, max_x = -1, max_y = -1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(i % w);
      const int y = static_cast<int>(i / w);
      component_depths.push_back(m.at(x, y));
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny[k]) * w + nx[k];
        if (fg.mask[j] && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    const auto area = static_cast<std::int64_t>(component_depths.size());
    if (area < params.min_area || static_cast<double>(area) > max_area) continue;

    std::sort(component_depths.begin(), component_depths.end());
    const double med = median_sorted(component_depths);
    Detection det;
    det.box = PixelBox{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
    det.confidence = std::clamp(
        (fg.background_level - med) / params.confidence_scale, 0.0, 1.0);
    det.source = DetectionSource::kNative;
    out.push_back(det);
  }

  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    return a.confidence > b.confidence;
  });
  return out;
}

/// Keep detections with confidence >= threshold (inclusive), order preserved.
inline std::vector<Detection> filter_by_confidence(const std::vector<Detection>& dets,
                                                   double threshold) {
  if (threshold < 0 || threshold > 1)
    throw ConfigError("confidence threshold outside [0, 1]");
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (const auto& d : dets) {
    if (d.confidence >= threshold) out.push_back(d);
  }
  return out;
}

}  // namespace depthsight
