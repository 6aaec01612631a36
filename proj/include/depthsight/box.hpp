// Copyright 2026 the depthsight authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>

namespace depthsight {

/// Axis-aligned pixel rectangle. The covered pixel range is half-open:
/// columns [x, x+w), rows [y, y+h). A box with w <= 0 or h <= 0 is empty.
struct PixelBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool empty() const { return w <= 0 || h <= 0; }
  std::int64_t area() const {
    return empty() ? 0 : static_cast<std::int64_t>(w) * h;
  }
  int right() const { return x + w; }   // exclusive
  int bottom() const { return y + h; }  // exclusive

  bool contains(int px, int py) const {
    return px >= x && px < right() && py >= y && py < bottom();
  }

  bool operator==(const PixelBox&) const = default;
};

inline PixelBox intersect(const PixelBox& a, const PixelBox& b) {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.right(), b.right());
  const int y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return PixelBox{};
  return PixelBox{x0, y0, x1 - x0, y1 - y0};
}

/// Clamp a box into an image of the given size. The result may be empty.
inline PixelBox clamp_to_image(const PixelBox& b, int width, int height) {
  return intersect(b, PixelBox{0, 0, width, height});
}

/// Intersection over union of two pixel rectangles, in [0, 1].
/// Symmetric; 1 iff the boxes are identical and nonempty, 0 iff disjoint.
inline double iou(const PixelBox& a, const PixelBox& b) {
  const std::int64_t inter = intersect(a, b).area();
  if (inter == 0) return 0.0;
  const std::int64_t uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace depthsight
