// Copyright 2026 the depthsight authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "depthsight/box.hpp"
#include "depthsight/errors.hpp"
#include "depthsight/image.hpp"

namespace depthsight {

/// 2D grid of metric depths (meters along the optical axis). Pixels with no
/// depth reading carry a NaN marker. Every stored value is either that
/// marker or finite and > 0.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height)
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * height, invalid_marker()) {
    if (width < 1 || height < 1) throw InternalError("DepthMap: bad size");
  }

  static constexpr double invalid_marker() {
    return std::numeric_limits<double>::quiet_NaN();
  }
  static bool is_valid(double z) { return std::isfinite(z) && z > 0; }

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  double at(int x, int y) const { return data_[idx(x, y)]; }
  bool valid_at(int x, int y) const { return is_valid(at(x, y)); }

  void set(int x, int y, double meters) {
    if (!is_valid(meters)) {
      throw InternalError("DepthMap::set: depth must be finite and > 0, got " +
                          std::to_string(meters));
    }
    data_[idx(x, y)] = meters;
  }
  void set_invalid(int x, int y) { data_[idx(x, y)] = invalid_marker(); }

  std::span<const double> data() const { return data_; }

  bool operator==(const DepthMap& o) const {
    if (width_ != o.width_ || height_ != o.height_) return false;
    for (std::size_t i = 0; i < data_.size(); ++i) {
      const bool va = is_valid(data_[i]), vb = is_valid(o.data_[i]);
      if (va != vb) return false;
      if (va && data_[i] != o.data_[i]) return false;
    }
    return true;
  }

 private:
  std::size_t idx(int x, int y) const {
    if (!in_bounds(x, y)) {
      throw OutOfBounds("depth map pixel (" + std::to_string(x) + ", " +
                        std::to_string(y) + ") outside " +
                        std::to_string(width_) + "x" + std::to_string(height_));
    }
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Affine 8-bit depth encoding. Level 0 is reserved for invalid pixels;
/// a valid depth exactly at z_min also lands on level 0 (documented
/// aliasing: "no depth" survives the 8-bit path at the cost of exact-z_min
/// pixels).
struct QuantizationSpec {
  double z_min = 0.5;
  double z_max = 20.0;
  static constexpr int kLevels = 256;

  void validate() const {
    if (!(z_min > 0) || !(z_min < z_max)) {
      throw ConfigError("quantization: require 0 < z_min < z_max");
    }
  }

  double step() const { return (z_max - z_min) / (kLevels - 1.0); }

  std::uint8_t level_of(double z) const {
    const double c = std::clamp(z, z_min, z_max);
    const long k = std::lround(255.0 * (c - z_min) / (z_max - z_min));
    return static_cast<std::uint8_t>(k);
  }

  double depth_of(int level) const { return z_min + level * step(); }
};

/// Encode a depth map as an 8-bit image with three identical channels.
/// Valid depth -> round(255*(clamp(z)-z_min)/(z_max-z_min)); invalid -> 0.
inline Image8 quantize(const DepthMap& m, const QuantizationSpec& q) {
  q.validate();
  Image8 img(m.width(), m.height(), 3);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const double z = m.at(x, y);
      const std::uint8_t level = DepthMap::is_valid(z) ? q.level_of(z) : 0;
      img.at(x, y, 0) = level;
      img.at(x, y, 1) = level;
      img.at(x, y, 2) = level;
    }
  }
  return img;
}

/// Decode an 8-bit image (1 channel, or >=2 equal channels) back to depths.
/// Level k > 0 -> z_min + k*(z_max-z_min)/255; level 0 -> invalid.
inline DepthMap dequantize(const Image8& img, const QuantizationSpec& q) {
  q.validate();
  if (!channels_equal(img)) {
    throw ChannelMismatch("dequantize: image channels are not identical");
  }
  DepthMap m(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int level = img.at(x, y, 0);
      if (level > 0) m.set(x, y, q.depth_of(level));
    }
  }
  return m;
}

/// Fraction of pixels inside box (clipped to the image) that carry valid
/// depth. The box must intersect the image.
inline double valid_fraction(const DepthMap& m, const PixelBox& box) {
  const PixelBox b = clamp_to_image(box, m.width(), m.height());
  if (b.empty()) {
    throw OutOfBounds("valid_fraction: box does not intersect the image");
  }
  std::int64_t valid = 0;
  for (int y = b.y; y < b.bottom(); ++y) {
    for (int x = b.x; x < b.right(); ++x) {
      if (m.valid_at(x, y)) ++valid;
    }
  }
  return static_cast<double>(valid) / static_cast<double>(b.area());
}

}  // namespace depthsight
