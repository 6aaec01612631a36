// Copyright 2026 the depthsight authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "depthsight/box.hpp"
#include "depthsight/depthmap.hpp"
#include "depthsight/errors.hpp"
#include "depthsight/geometry.hpp"
#include "depthsight/image.hpp"

namespace depthsight {

// ---------------------------------------------------------------------------
// Primitives. All coordinates in meters. Rays are cast with unnormalized
// direction ((u-cx)/f, (v-cy)/f, 1) so the ray parameter t IS the z-depth
// (distance along the optical axis), matching what a rectified stereo
// pipeline measures.
// ---------------------------------------------------------------------------

struct Ray {
  Point3D origin;
  Point3D dir;
};

/// Infinite plane n . p = offset.
struct Plane {
  Point3D normal;
  double offset = 0;
};

struct Sphere {
  Point3D center;
  double radius = 0;
};

/// Axis-aligned box in its owning frame.
struct AxisBox {
  Point3D min_corner;
  Point3D max_corner;
};

/// Flat disc: circle of the given radius in the plane through center.
struct Disc {
  Point3D center;
  Point3D normal;
  double radius = 0;
};

/// Capped cylinder from p0 to p1.
struct Cylinder {
  Point3D p0;
  Point3D p1;
  double radius = 0;
};

using Primitive = std::variant<Plane, Sphere, AxisBox, Disc, Cylinder>;

namespace detail {

inline constexpr double kRayEps = 1e-9;

inline std::optional<double> hit_plane(const Plane& pl, const Ray& r) {
  const double denom = dot(pl.normal, r.dir);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = (pl.offset - dot(pl.normal, r.origin)) / denom;
  if (t < kRayEps) return std::nullopt;
  return t;
}

inline std::optional<double> hit_sphere(const Sphere& s, const Ray& r) {
  const Point3D oc = r.origin - s.center;
  const double a = dot(r.dir, r.dir);
  const double b = 2.0 * dot(r.dir, oc);
  const double c = dot(oc, oc) - s.radius * s.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = (-b - sq) / (2.0 * a);
  if (t0 >= kRayEps) return t0;
  const double t1 = (-b + sq) / (2.0 * a);
  if (t1 >= kRayEps) return t1;
  return std::nullopt;
}

inline std::optional<double> hit_axis_box(const AxisBox& b, const Ray& r) {
  // Slab test; IEEE inf handles axis-parallel rays.
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  const double o[3] = {r.origin.x, r.origin.y, r.origin.z};
  const double d[3] = {r.dir.x, r.dir.y, r.dir.z};
  const double lo[3] = {b.min_corner.x, b.min_corner.y, b.min_corner.z};
  const double hi[3] = {b.max_corner.x, b.max_corner.y, b.max_corner.z};
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (o[i] < lo[i] || o[i] > hi[i]) return std::nullopt;
      continue;
    }
    double t0 = (lo[i] - o[i]) / d[i];
    double t1 = (hi[i] - o[i]) / d[i];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return std::nullopt;
  }
  if (tmin >= kRayEps) return tmin;
  if (tmax >= kRayEps) return tmax;  // origin inside the box
  return std::nullopt;
}

inline std::optional<double> hit_disc(const Disc& d, const Ray& r) {
  const Plane pl{d.normal, dot(d.normal, d.center)};
  const auto t = hit_plane(pl, r);
  if (!t) return std::nullopt;
  const Point3D p = r.origin + r.dir * *t;
  if (norm(p - d.center) > d.radius) return std::nullopt;
  return t;
}

inline std::optional<double> hit_cylinder(const Cylinder& c, const Ray& r) {
  const Point3D axis = c.p1 - c.p0;
  const double axis_len2 = dot(axis, axis);
  if (axis_len2 <= 0) return std::nullopt;

  // Infinite cylinder: components of (o + t*d - p0) orthogonal to the axis.
  const Point3D m = r.origin - c.p0;
  const double md = dot(m, axis);
  const double nd = dot(r.dir, axis);
  const double a = dot(r.dir, r.dir) - nd * nd / axis_len2;
  const double b = 2.0 * (dot(m, r.dir) - md * nd / axis_len2);
  const double cc = dot(m, m) - md * md / axis_len2 - c.radius * c.radius;

  double best = std::numeric_limits<double>::infinity();
  if (std::abs(a) > 1e-14) {
    const double disc = b * b - 4.0 * a * cc;
    if (disc >= 0) {
      const double sq = std::sqrt(disc);
      for (const double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (t < kRayEps || t >= best) continue;
        const double s = md + t * nd;  // axis parameter * |axis|^2
        if (s >= 0 && s <= axis_len2) best = t;
      }
    }
  }
  // End caps.
  for (const Point3D& cap : {c.p0, c.p1}) {
    const Disc d{cap, axis, c.radius};
    if (const auto t = hit_disc(d, r); t && *t < best) best = *t;
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

}  // namespace detail

inline std::optional<double> intersect(const Primitive& prim, const Ray& ray) {
  return std::visit(
      [&](const auto& shape) -> std::optional<double> {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Plane>) return detail::hit_plane(shape, ray);
        else if constexpr (std::is_same_v<T, Sphere>) return detail::hit_sphere(shape, ray);
        else if constexpr (std::is_same_v<T, AxisBox>) return detail::hit_axis_box(shape, ray);
        else if constexpr (std::is_same_v<T, Disc>) return detail::hit_disc(shape, ray);
        else return detail::hit_cylinder(shape, ray);
      },
      prim);
}

inline void validate_primitive(const Primitive& prim) {
  std::visit(
      [](const auto& shape) {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Plane>) {
          if (norm(shape.normal) <= 0) throw ConfigError("plane: zero normal");
        } else if constexpr (std::is_same_v<T, Sphere>) {
          if (!(shape.radius > 0)) throw ConfigError("sphere: radius must be > 0");
        } else if constexpr (std::is_same_v<T, AxisBox>) {
          if (!(shape.min_corner.x < shape.max_corner.x &&
                shape.min_corner.y < shape.max_corner.y &&
                shape.min_corner.z < shape.max_corner.z)) {
            throw ConfigError("box: min corner must be strictly below max corner");
          }
        } else if constexpr (std::is_same_v<T, Disc>) {
          if (!(shape.radius > 0)) throw ConfigError("disc: radius must be > 0");
          if (norm(shape.normal) <= 0) throw ConfigError("disc: zero normal");
        } else {
          if (!(shape.radius > 0)) throw ConfigError("cylinder: radius must be > 0");
          if (norm(shape.p1 - shape.p0) <= 0) throw ConfigError("cylinder: zero length");
        }
      },
      prim);
}

// ---------------------------------------------------------------------------
// Target models
// ---------------------------------------------------------------------------

/// Axis-aligned bounds of a primitive set.
struct Bounds3D {
  Point3D min{std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity()};
  Point3D max{-std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity()};

  void grow(const Point3D& lo, const Point3D& hi) {
    min.x = std::min(min.x, lo.x);
    min.y = std::min(min.y, lo.y);
    min.z = std::min(min.z, lo.z);
    max.x = std::max(max.x, hi.x);
    max.y = std::max(max.y, hi.y);
    max.z = std::max(max.z, hi.z);
  }
  Point3D extent() const { return max - min; }
};

/// Rotation about the vertical (y) axis. Camera frame: x right, y down,
/// z forward; yaw turns the nose from +z toward +x.
inline Point3D rotate_yaw(const Point3D& p, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  return Point3D{c * p.x + s * p.z, p.y, -s * p.x + c * p.z};
}

namespace detail {

inline Bounds3D primitive_bounds(const Primitive& prim, double yaw) {
  Bounds3D b;
  const auto axis_reach = [](const Point3D& n_unit, double r) {
    // Half-extent a disc of radius r contributes along each axis.
    return Point3D{r * std::sqrt(std::max(0.0, 1.0 - n_unit.x * n_unit.x)),
                   r * std::sqrt(std::max(0.0, 1.0 - n_unit.y * n_unit.y)),
                   r * std::sqrt(std::max(0.0, 1.0 - n_unit.z * n_unit.z))};
  };
  std::visit(
      [&](const auto& shape) {
        using T = std::decay_t<decltype(shape)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          const Point3D c = rotate_yaw(shape.center, yaw);
          const Point3D r{shape.radius, shape.radius, shape.radius};
          b.grow(c - r, c + r);
        } else if constexpr (std::is_same_v<T, AxisBox>) {
          for (int i = 0; i < 8; ++i) {
            const Point3D corner{(i & 1) ? shape.max_corner.x : shape.min_corner.x,
                                 (i & 2) ? shape.max_corner.y : shape.min_corner.y,
                                 (i & 4) ? shape.max_corner.z : shape.min_corner.z};
            const Point3D c = rotate_yaw(corner, yaw);
            b.grow(c, c);
          }
        } else if constexpr (std::is_same_v<T, Disc>) {
          const Point3D c = rotate_yaw(shape.center, yaw);
          Point3D n = rotate_yaw(shape.normal, yaw);
          n = n * (1.0 / norm(n));
          const Point3D r = axis_reach(n, shape.radius);
          b.grow(c - r, c + r);
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          const Point3D a = rotate_yaw(shape.p0, yaw);
          const Point3D c = rotate_yaw(shape.p1, yaw);
          Point3D ax = c - a;
          ax = ax * (1.0 / norm(ax));
          const Point3D r = axis_reach(ax, shape.radius);
          const Point3D lo{std::min(a.x, c.x), std::min(a.y, c.y), std::min(a.z, c.z)};
          const Point3D hi{std::max(a.x, c.x), std::max(a.y, c.y), std::max(a.z, c.z)};
          b.grow(lo - r, hi + r);
        } else {
          throw ConfigError("target models cannot contain infinite planes");
        }
      },
      prim);
  return b;
}

}  // namespace detail

/// Composition of primitives in a drone-local frame (body center at the
/// origin, same axis convention as the camera). Yaw is applied at render
/// time, so parts stay simple axis-aligned shapes plus cylinders/discs.
struct DroneModel {
  std::string name;
  std::vector<Primitive> parts;

  Bounds3D bounds(double yaw = 0) const {
    if (parts.empty()) throw ConfigError("target model has no parts");
    Bounds3D b;
    for (const auto& p : parts) {
      const Bounds3D pb = detail::primitive_bounds(p, yaw);
      b.grow(pb.min, pb.max);
    }
    return b;
  }

  /// Largest axis extent at yaw 0 (rotor-tip-to-rotor-tip scale).
  double bounding_diameter() const {
    const Point3D e = bounds(0).extent();
    return std::max({e.x, e.y, e.z});
  }

  /// Extent along the optical axis once yawed; the resolution limit of
  /// single-surface-point depth estimates for this model.
  double depth_extent(double yaw) const { return bounds(yaw).extent().z; }

  void validate() const {
    for (const auto& p : parts) validate_primitive(p);
    const double d = bounding_diameter();
    if (d < 0.2 || d > 1.5) {
      throw ConfigError("target model '" + name + "' bounding diameter " +
                        std::to_string(d) + " outside [0.2, 1.5] m");
    }
  }

  // --- stock models -------------------------------------------------------

  /// Compact X-frame quadrotor, ~0.38 m across, depth extent ~0.29 m at yaw 0.
  static DroneModel quad_small() { return make_multirotor("quad_small", 4, 0.15, 0.012, 0.04, {0.12, 0.07, 0.12}, M_PI / 4.0); }

  /// Mid-size X-frame quadrotor, ~0.50 m across.
  static DroneModel quad_medium() { return make_multirotor("quad_medium", 4, 0.20, 0.015, 0.05, {0.16, 0.09, 0.16}, M_PI / 4.0); }

  /// Large hexrotor, ~0.93 m across.
  static DroneModel hex_large() { return make_multirotor("hex_large", 6, 0.40, 0.02, 0.065, {0.24, 0.12, 0.24}, 0.0); }

  /// Solid sphere; a convex calibration target.
  static DroneModel sphere_target(double diameter) {
    DroneModel m;
    m.name = "sphere_target";
    m.parts.push_back(Sphere{{0, 0, 0}, diameter / 2.0});
    m.validate();
    return m;
  }

  /// Solid box; a convex calibration target.
  static DroneModel box_target(double wx, double wy, double wz) {
    DroneModel m;
    m.name = "box_target";
    m.parts.push_back(AxisBox{{-wx / 2, -wy / 2, -wz / 2}, {wx / 2, wy / 2, wz / 2}});
    m.validate();
    return m;
  }

  static DroneModel by_name(const std::string& name) {
    if (name == "quad_small") return quad_small();
    if (name == "quad_medium") return quad_medium();
    if (name == "hex_large") return hex_large();
    if (name == "sphere_target") return sphere_target(0.4);
    if (name == "box_target") return box_target(0.4, 0.4, 0.15);
    throw ConfigError("unknown target model '" + name + "'");
  }

 private:
  static DroneModel make_multirotor(std::string name, int n_arms, double arm_len,
                                    double arm_radius, double rotor_radius,
                                    Point3D body, double first_arm_angle) {
    DroneModel m;
    m.name = std::move(name);
    m.parts.push_back(AxisBox{{-body.x / 2, -body.y / 2, -body.z / 2},
                              {body.x / 2, body.y / 2, body.z / 2}});
    for (int i = 0; i < n_arms; ++i) {
      const double a = first_arm_angle + 2.0 * M_PI * i / n_arms;
      const Point3D tip{arm_len * std::cos(a), 0.0, arm_len * std::sin(a)};
      m.parts.push_back(Cylinder{{0, 0, 0}, tip, arm_radius});
      // Rotor disc sits just above the arm tip (y points down).
      m.parts.push_back(Disc{{tip.x, -body.y / 2, tip.z}, {0, 1, 0}, rotor_radius});
    }
    m.validate();
    return m;
  }
};

// ---------------------------------------------------------------------------
// Scenes
// ---------------------------------------------------------------------------

struct Pose {
  Point3D position;
  double yaw = 0;
};

/// Stereo-matching artifact model. Applied per valid pixel in row-major
/// order: dropout first (pixel becomes invalid, no further draws), then
/// additive Gaussian depth noise (results <= 0 become invalid), then
/// speckle, which replaces the depth with a spurious nearer reading drawn
/// uniformly from [max(0.1, z - speckle_depth_range), z).
struct NoiseSpec {
  double gaussian_sigma = 0;       // meters
  double dropout_rate = 0;         // [0, 1]
  double speckle_rate = 0;         // [0, 1]
  double speckle_depth_range = 0;  // meters

  void validate() const {
    if (gaussian_sigma < 0) throw ConfigError("noise: gaussian_sigma < 0");
    if (dropout_rate < 0 || dropout_rate > 1) throw ConfigError("noise: dropout_rate outside [0, 1]");
    if (speckle_rate < 0 || speckle_rate > 1) throw ConfigError("noise: speckle_rate outside [0, 1]");
    if (speckle_depth_range < 0) throw ConfigError("noise: speckle_depth_range < 0");
  }

  bool enabled() const {
    return gaussian_sigma > 0 || dropout_rate > 0 || speckle_rate > 0;
  }
};

struct SceneSpec {
  StereoRig rig;
  std::vector<Primitive> background;
  std::optional<DroneModel> target;
  Pose target_pose;
  NoiseSpec noise;
  std::uint64_t seed = 0;

  void validate() const {
    rig.validate();
    for (const auto& p : background) validate_primitive(p);
    if (target) target->validate();
    noise.validate();
  }
};

/// Ground truth for one rendered frame. gt_box is the tight pixel bounding
/// rectangle of the segmentation mask (empty iff the mask is empty);
/// target_position is the body center in the left-camera frame.
struct Annotation {
  std::int64_t frame_id = 0;
  PixelBox gt_box;
  Point3D target_position;
  double occlusion_fraction = 0;
};

struct RenderResult {
  DepthMap depth;
  Image8 mask;  // single channel, 255 = target
  Annotation annotation;
};

/// Ray-cast one frame. Deterministic: identical (spec, frame_id) pairs give
/// bit-identical results. The mask and annotation are geometric ground truth
/// and are not perturbed by noise.
inline RenderResult render(const SceneSpec& spec, std::int64_t frame_id = 0) {
  spec.validate();
  const StereoRig& rig = spec.rig;

  DepthMap depth(rig.width, rig.height);
  Image8 mask(rig.width, rig.height, 1);

  const bool has_target = spec.target.has_value();
  const double yaw = spec.target_pose.yaw;
  const Point3D t_pos = spec.target_pose.position;

  std::int64_t hits = 0, target_visible = 0, target_occluded = 0;
  int min_x = rig.width, min_y = rig.height, max_x = -1, max_y = -1;

  for (int y = 0; y < rig.height; ++y) {
    for (int x = 0; x < rig.width; ++x) {
      const Ray ray{{0, 0, 0},
                    {(x - rig.cx_left) / rig.focal, (y - rig.cy_left) / rig.focal, 1.0}};

      double bg_t = std::numeric_limits<double>::infinity();
      for (const auto& prim : spec.background) {
        if (const auto t = intersect(prim, ray); t && *t < bg_t) bg_t = *t;
      }

      double tg_t = std::numeric_limits<double>::infinity();
      if (has_target) {
        // Ray in the drone-local frame; the parameter t is unchanged by the
        // rigid transform, so it stays a camera-frame z-depth.
        const Ray local{rotate_yaw(Point3D{0, 0, 0} - t_pos, -yaw),
                        rotate_yaw(ray.dir, -yaw)};
        for (const auto& prim : spec.target->parts) {
          if (const auto t = intersect(prim, local); t && *t < tg_t) tg_t = *t;
        }
      }

      const bool target_hit = std::isfinite(tg_t);
      const bool target_nearest = target_hit && tg_t < bg_t;
      const double t = std::min(bg_t, tg_t);
      if (std::isfinite(t)) {
        depth.set(x, y, t);
        ++hits;
      }
      if (target_nearest) {
        mask.at(x, y) = 255;
        ++target_visible;
        min_x = std::min(min_x, x);
        min_y = std::min(min_y, y);
        max_x = std::max(max_x, x);
        max_y = std::max(max_y, y);
      } else if (target_hit) {
        ++target_occluded;
      }
    }
  }

  if (hits == 0) throw EmptyScene("no primitive in front of the camera");

  if (spec.noise.enabled()) {
    std::mt19937_64 rng(spec.seed + static_cast<std::uint64_t>(frame_id));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const NoiseSpec& n = spec.noise;
    for (int y = 0; y < rig.height; ++y) {
      for (int x = 0; x < rig.width; ++x) {
        double z = depth.at(x, y);
        if (!DepthMap::is_valid(z)) continue;
        if (n.dropout_rate > 0 && unit(rng) < n.dropout_rate) {
          depth.set_invalid(x, y);
          continue;
        }
        if (n.gaussian_sigma > 0) {
          z += n.gaussian_sigma * gauss(rng);
          if (!(z > 0)) {
            depth.set_invalid(x, y);
            continue;
          }
        }
        if (n.speckle_rate > 0 && unit(rng) < n.speckle_rate) {
          const double lo = std::max(0.1, z - n.speckle_depth_range);
          if (lo < z) z = lo + (z - lo) * unit(rng);
        }
        depth.set(x, y, z);
      }
    }
  }

  Annotation ann;
  ann.frame_id = frame_id;
  ann.target_position = t_pos;
  if (max_x >= 0) {
    ann.gt_box = PixelBox{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
  }
  const std::int64_t target_rays = target_visible + target_occluded;
  ann.occlusion_fraction =
      target_rays > 0 ? static_cast<double>(target_occluded) / target_rays : 0.0;

  return RenderResult{std::move(depth), std::move(mask), ann};
}

}  // namespace depthsight
