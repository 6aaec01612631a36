// Copyright 2026 the depthsight authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "depthsight/errors.hpp"

namespace depthsight {

/// 8-bit image, row-major, interleaved channels.
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  Image8() = default;
  Image8(int w, int h, int c)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, 0) {
    if (w < 0 || h < 0 || c < 1) throw InternalError("Image8: bad dimensions");
  }

  std::uint8_t at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool operator==(const Image8&) const = default;
};

/// True when every channel of every pixel carries the same value.
/// Trivially true for single-channel images.
inline bool channels_equal(const Image8& img) {
  if (img.channels <= 1) return true;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t v = img.at(x, y, 0);
      for (int c = 1; c < img.channels; ++c) {
        if (img.at(x, y, c) != v) return false;
      }
    }
  }
  return true;
}

}  // namespace depthsight
