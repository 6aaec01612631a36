// Copyright 2026 the depthsight authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>

#include "depthsight/errors.hpp"

namespace depthsight {

/// 3D point in the left-camera frame: z forward, x right, y down. Meters.
struct Point3D {
  double x = 0;
  double y = 0;
  double z = 0;

  Point3D operator+(const Point3D& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Point3D operator-(const Point3D& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Point3D operator*(double s) const { return {x * s, y * s, z * s}; }
  bool operator==(const Point3D&) const = default;
};

inline double dot(const Point3D& a, const Point3D& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(const Point3D& a) { return std::sqrt(dot(a, a)); }

/// Pixel position plus disparity, as produced by projecting into a
/// rectified stereo rig.
struct PixelDisparity {
  double u = 0;
  double v = 0;
  double d = 0;
};

/// Rectified stereo rig: shared focal length, zero vertical offset.
///
/// Disparity convention: d = x_right - x_left. A point in front of the rig
/// then has d <= cx_left - cx_right - f*T/z, i.e. negative disparity when
/// both principal points share their x coordinate. This keeps the
/// reprojection formula's denominator (cx_left - cx_right - d) positive for
/// visible objects. Use disparity_from_conventional() when ingesting
/// positive-disparity data.
struct StereoRig {
  double focal = 0;       // f, pixels (left camera, shared by the rig)
  double cx_left = 0;     // principal point of the left camera, pixels
  double cy_left = 0;
  double cx_right = 0;    // principal point x of the right camera, pixels
  double baseline_m = 0;  // T, meters
  int width = 0;          // image size, pixels
  int height = 0;

  void validate() const {
    if (!(focal > 0)) throw ConfigError("rig: focal must be > 0");
    if (!(baseline_m > 0)) throw ConfigError("rig: baseline_m must be > 0");
    if (width < 1 || height < 1) throw ConfigError("rig: image size must be >= 1x1");
    if (cx_left < 0 || cx_left >= width)
      throw ConfigError("rig: cx_l outside [0, width)");
    if (cy_left < 0 || cy_left >= height)
      throw ConfigError("rig: cy_l outside [0, height)");
    if (cx_right < 0 || cx_right >= width)
      throw ConfigError("rig: cx_r outside [0, width)");
  }
};

/// Negate a disparity given in the conventional positive-in-front sign
/// (d = x_left - x_right) into this library's convention.
inline double disparity_from_conventional(double d) { return -d; }

namespace detail {
inline constexpr double kDisparityDenomTol = 1e-9;

inline void check_pixel_in_bounds(const StereoRig& rig, double u, double v) {
  if (u < 0 || u >= rig.width || v < 0 || v >= rig.height) {
    throw OutOfBounds("pixel (" + std::to_string(u) + ", " + std::to_string(v) +
                      ") outside " + std::to_string(rig.width) + "x" +
                      std::to_string(rig.height) + " image");
  }
}
}  // namespace detail

/// Reproject pixel (u, v) with disparity d to 3D:
///   [X Y Z]^T = T / (cx_l - cx_r - d) * [u - cx_l, v - cy_l, f]^T
inline Point3D reproject(const StereoRig& rig, double u, double v, double d) {
  detail::check_pixel_in_bounds(rig, u, v);
  const double denom = rig.cx_left - rig.cx_right - d;
  if (std::abs(denom) < detail::kDisparityDenomTol) {
    throw DegenerateDisparity("disparity denominator " + std::to_string(denom) +
                              " below tolerance");
  }
  const double scale = rig.baseline_m / denom;
  return Point3D{scale * (u - rig.cx_left), scale * (v - rig.cy_left),
                 scale * rig.focal};
}

/// Inverse of reproject(): pinhole projection plus the disparity a rectified
/// rig would measure at depth z.
inline PixelDisparity project(const StereoRig& rig, const Point3D& p) {
  if (!(p.z > 0)) {
    throw NonPositiveDepth("cannot project point with z = " + std::to_string(p.z));
  }
  PixelDisparity r;
  r.u = rig.focal * p.x / p.z + rig.cx_left;
  r.v = rig.focal * p.y / p.z + rig.cy_left;
  r.d = (rig.cx_left - rig.cx_right) - rig.focal * rig.baseline_m / p.z;
  return r;
}

inline double depth_to_disparity(const StereoRig& rig, double z) {
  if (!(z > 0)) throw NonPositiveDepth("depth " + std::to_string(z) + " <= 0");
  return (rig.cx_left - rig.cx_right) - rig.focal * rig.baseline_m / z;
}

inline double disparity_to_depth(const StereoRig& rig, double d) {
  const double denom = rig.cx_left - rig.cx_right - d;
  if (std::abs(denom) < detail::kDisparityDenomTol) {
    throw DegenerateDisparity("disparity denominator " + std::to_string(denom) +
                              " below tolerance");
  }
  return rig.baseline_m * rig.focal / denom;
}

}  // namespace depthsight
