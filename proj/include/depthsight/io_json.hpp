// Copyright 2026 the depthsight authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "depthsight/detector.hpp"
#include "depthsight/errors.hpp"
#include "depthsight/evalkit.hpp"
#include "depthsight/geometry.hpp"
#include "depthsight/localizer.hpp"
#include "depthsight/synth.hpp"

namespace depthsight {

using json = nlohmann::json;

namespace detail {

inline json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Small value converters
// ---------------------------------------------------------------------------

inline json to_json(const Point3D& p) { return json::array({p.x, p.y, p.z}); }

inline Point3D point3d_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected [x, y, z] array");
  return Point3D{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json to_json(const PixelBox& b) {
  return json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}};
}

inline PixelBox pixelbox_from_json(const json& j) {
  return PixelBox{j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(),
                  j.at("h").get<int>()};
}

inline json to_json(const Pose& p) {
  return json{{"position", to_json(p.position)}, {"yaw", p.yaw}};
}

inline Pose pose_from_json(const json& j) {
  Pose p;
  p.position = point3d_from_json(j.at("position"));
  p.yaw = j.value("yaw", 0.0);
  return p;
}

// ---------------------------------------------------------------------------
// Rig calibration file: {focal, cx_l, cy_l, cx_r, baseline_m, width, height}
// ---------------------------------------------------------------------------

inline json to_json(const StereoRig& rig) {
  return json{{"focal", rig.focal},         {"cx_l", rig.cx_left},
              {"cy_l", rig.cy_left},        {"cx_r", rig.cx_right},
              {"baseline_m", rig.baseline_m}, {"width", rig.width},
              {"height", rig.height}};
}

inline StereoRig rig_from_json(const json& j) {
  try {
    StereoRig rig;
    rig.focal = j.at("focal").get<double>();
    rig.cx_left = j.at("cx_l").get<double>();
    rig.cy_left = j.at("cy_l").get<double>();
    rig.cx_right = j.at("cx_r").get<double>();
    rig.baseline_m = j.at("baseline_m").get<double>();
    rig.width = j.at("width").get<int>();
    rig.height = j.at("height").get<int>();
    rig.validate();
    return rig;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad rig calibration: ") + e.what());
  }
}

inline StereoRig load_rig(const std::filesystem::path& path) {
  try {
    return rig_from_json(detail::parse_json_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void save_rig(const std::filesystem::path& path, const StereoRig& rig) {
  detail::write_json_file(path, to_json(rig));
}

// ---------------------------------------------------------------------------
// Primitives and target models
// ---------------------------------------------------------------------------

inline json to_json(const Primitive& prim) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Plane>) {
          return json{{"type", "plane"}, {"normal", to_json(s.normal)}, {"offset", s.offset}};
        } else if constexpr (std::is_same_v<T, Sphere>) {
          return json{{"type", "sphere"}, {"center", to_json(s.center)}, {"radius", s.radius}};
        } else if constexpr (std::is_same_v<T, AxisBox>) {
          return json{{"type", "box"}, {"min", to_json(s.min_corner)}, {"max", to_json(s.max_corner)}};
        } else if constexpr (std::is_same_v<T, Disc>) {
          return json{{"type", "disc"}, {"center", to_json(s.center)},
                      {"normal", to_json(s.normal)}, {"radius", s.radius}};
        } else {
          return json{{"type", "cylinder"}, {"p0", to_json(s.p0)}, {"p1", to_json(s.p1)},
                      {"radius", s.radius}};
        }
      },
      prim);
}

inline Primitive primitive_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "plane") {
    return Plane{point3d_from_json(j.at("normal")), j.at("offset").get<double>()};
  }
  if (type == "sphere") {
    return Sphere{point3d_from_json(j.at("center")), j.at("radius").get<double>()};
  }
  if (type == "box") {
    return AxisBox{point3d_from_json(j.at("min")), point3d_from_json(j.at("max"))};
  }
  if (type == "disc") {
    return Disc{point3d_from_json(j.at("center")), point3d_from_json(j.at("normal")),
                j.at("radius").get<double>()};
  }
  if (type == "cylinder") {
    return Cylinder{point3d_from_json(j.at("p0")), point3d_from_json(j.at("p1")),
                    j.at("radius").get<double>()};
  }
  throw ConfigError("unknown primitive type '" + type + "'");
}

inline json to_json(const DroneModel& m) {
  json parts = json::array();
  for (const auto& p : m.parts) parts.push_back(to_json(p));
  return json{{"name", m.name}, {"parts", parts}};
}

/// Either {"model": "quad_small"} for a stock model or
/// {"name": ..., "parts": [primitives...]} for a custom one.
inline DroneModel model_from_json(const json& j) {
  if (j.is_string()) return DroneModel::by_name(j.get<std::string>());
  if (j.contains("model")) return DroneModel::by_name(j.at("model").get<std::string>());
  DroneModel m;
  m.name = j.value("name", "custom");
  for (const auto& pj : j.at("parts")) m.parts.push_back(primitive_from_json(pj));
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Scene file: a SceneSpec plus an optional trajectory. The rig may be given
// inline or as a path relative to the scene file.
// ---------------------------------------------------------------------------

struct SceneFile {
  SceneSpec spec;
  std::vector<Pose> trajectory;  // empty -> single frame at spec.target_pose
};

inline json to_json(const NoiseSpec& n) {
  return json{{"gaussian_sigma", n.gaussian_sigma},
              {"dropout_rate", n.dropout_rate},
              {"speckle_rate", n.speckle_rate},
              {"speckle_depth_range", n.speckle_depth_range}};
}

inline NoiseSpec noise_from_json(const json& j) {
  NoiseSpec n;
  n.gaussian_sigma = j.value("gaussian_sigma", 0.0);
  n.dropout_rate = j.value("dropout_rate", 0.0);
  n.speckle_rate = j.value("speckle_rate", 0.0);
  n.speckle_depth_range = j.value("speckle_depth_range", 0.0);
  n.validate();
  return n;
}

inline json to_json(const SceneFile& f) {
  json j;
  j["rig"] = to_json(f.spec.rig);
  json bg = json::array();
  for (const auto& p : f.spec.background) bg.push_back(to_json(p));
  j["background"] = bg;
  j["target"] = f.spec.target ? to_json(*f.spec.target) : json(nullptr);
  j["target_pose"] = to_json(f.spec.target_pose);
  j["noise"] = to_json(f.spec.noise);
  j["seed"] = f.spec.seed;
  if (!f.trajectory.empty()) {
    json traj = json::array();
    for (const auto& p : f.trajectory) traj.push_back(to_json(p));
    j["trajectory"] = traj;
  }
  return j;
}

inline SceneFile scene_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    SceneFile f;
    const json& rig = j.at("rig");
    f.spec.rig = rig.is_string() ? load_rig(base_dir / rig.get<std::string>())
                                 : rig_from_json(rig);
    for (const auto& pj : j.value("background", json::array())) {
      f.spec.background.push_back(primitive_from_json(pj));
    }
    if (j.contains("target") && !j.at("target").is_null()) {
      f.spec.target = model_from_json(j.at("target"));
    }
    if (j.contains("target_pose")) f.spec.target_pose = pose_from_json(j.at("target_pose"));
    if (j.contains("noise")) f.spec.noise = noise_from_json(j.at("noise"));
    f.spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto& pj : j.value("trajectory", json::array())) {
      f.trajectory.push_back(pose_from_json(pj));
    }
    f.spec.validate();
    return f;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad scene spec: ") + e.what());
  }
}

inline SceneFile load_scene_file(const std::filesystem::path& path) {
  return scene_from_json(detail::parse_json_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Detector / match / study configs
// ---------------------------------------------------------------------------

inline json to_json(const DetectorParams& p) {
  return json{{"contrast_threshold", p.contrast_threshold},
              {"background_percentile", p.background_percentile},
              {"min_area", p.min_area},
              {"max_area_fraction", p.max_area_fraction},
              {"confidence_scale", p.confidence_scale}};
}

inline DetectorParams detector_params_from_json(const json& j) {
  DetectorParams p;
  p.contrast_threshold = j.value("contrast_threshold", p.contrast_threshold);
  p.background_percentile = j.value("background_percentile", p.background_percentile);
  p.min_area = j.value("min_area", p.min_area);
  p.max_area_fraction = j.value("max_area_fraction", p.max_area_fraction);
  p.confidence_scale = j.value("confidence_scale", p.confidence_scale);
  p.validate();
  return p;
}

inline DetectorParams load_detector_params(const std::filesystem::path& path) {
  return detector_params_from_json(detail::parse_json_file(path));
}

inline json to_json(const MatchSpec& m) {
  return json{{"iou_threshold", m.iou_threshold},
              {"confidence_threshold", m.confidence_threshold}};
}

inline MatchSpec match_spec_from_json(const json& j) {
  MatchSpec m;
  m.iou_threshold = j.value("iou_threshold", m.iou_threshold);
  m.confidence_threshold = j.value("confidence_threshold", m.confidence_threshold);
  m.validate();
  return m;
}

inline MatchSpec load_match_spec(const std::filesystem::path& path) {
  return match_spec_from_json(detail::parse_json_file(path));
}

inline json to_json(const DepthStudySpec& s) {
  json methods = json::array();
  for (const auto m : s.methods) methods.push_back(to_string(m));
  json bg = json::array();
  for (const auto& p : s.background) bg.push_back(to_json(p));
  return json{{"rig", to_json(s.rig)},
              {"background", bg},
              {"model", to_json(s.model)},
              {"target_yaw", s.target_yaw},
              {"hover_distances_m", s.hover_distances_m},
              {"n_samples", s.n_samples},
              {"noise", to_json(s.noise)},
              {"disparity_noise_model", s.disparity_noise_model},
              {"disparity_sigma_px", s.disparity_sigma_px},
              {"detector", to_json(s.detector)},
              {"methods", methods},
              {"seed", s.seed}};
}

inline DepthStudySpec study_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    DepthStudySpec s;
    const json& rig = j.at("rig");
    s.rig = rig.is_string() ? load_rig(base_dir / rig.get<std::string>())
                            : rig_from_json(rig);
    for (const auto& pj : j.value("background", json::array())) {
      s.background.push_back(primitive_from_json(pj));
    }
    if (j.contains("model")) s.model = model_from_json(j.at("model"));
    s.target_yaw = j.value("target_yaw", 0.0);
    s.hover_distances_m = j.at("hover_distances_m").get<std::vector<double>>();
    s.n_samples = j.value("n_samples", 10);
    if (j.contains("noise")) s.noise = noise_from_json(j.at("noise"));
    s.disparity_noise_model = j.value("disparity_noise_model", false);
    s.disparity_sigma_px = j.value("disparity_sigma_px", 0.0);
    if (j.contains("detector")) s.detector = detector_params_from_json(j.at("detector"));
    if (j.contains("methods")) {
      s.methods.clear();
      for (const auto& mj : j.at("methods")) {
        s.methods.push_back(zref_method_from_string(mj.get<std::string>()));
      }
    }
    s.seed = j.value("seed", std::uint64_t{0});
    s.validate();
    return s;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad depth-study spec: ") + e.what());
  }
}

inline DepthStudySpec load_study_spec(const std::filesystem::path& path) {
  return study_from_json(detail::parse_json_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Detections JSONL: one record per frame,
//   {"frame_id": N, "boxes": [{"x":..,"y":..,"w":..,"h":..,"conf":..}, ...]}
// ---------------------------------------------------------------------------

struct FrameDetections {
  std::int64_t frame_id = 0;
  std::vector<Detection> boxes;
};

inline void write_detections_jsonl(const std::filesystem::path& path,
                                   std::span<const FrameDetections> frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& f : frames) {
    json boxes = json::array();
    for (const auto& d : f.boxes) {
      boxes.push_back(json{{"x", d.box.x}, {"y", d.box.y}, {"w", d.box.w},
                           {"h", d.box.h}, {"conf", d.confidence}});
    }
    out << json{{"frame_id", f.frame_id}, {"boxes", boxes}}.dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

struct ExternalDetections {
  std::vector<FrameDetections> frames;
  int clamp_warnings = 0;  // boxes clamped/dropped at image bounds or bad conf
};

/// Ingest externally produced detections (the slot where a DNN front end
/// would plug in). Boxes are clamped to the image; fully-outside boxes are
/// dropped; each such fix bumps clamp_warnings. Confidences are clamped to
/// [0, 1] likewise. Negative width/height is an error.
inline ExternalDetections load_external_detections(const std::filesystem::path& path,
                                                   int image_width, int image_height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  ExternalDetections out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      FrameDetections f;
      f.frame_id = j.at("frame_id").get<std::int64_t>();
      for (const auto& bj : j.at("boxes")) {
        PixelBox b{bj.at("x").get<int>(), bj.at("y").get<int>(), bj.at("w").get<int>(),
                   bj.at("h").get<int>()};
        if (b.w < 0 || b.h < 0) {
          throw NegativeDimension(path.string() + ":" + std::to_string(line_no) +
                                  ": box with negative width/height");
        }
        double conf = bj.at("conf").get<double>();
        if (conf < 0 || conf > 1) {
          conf = std::clamp(conf, 0.0, 1.0);
          ++out.clamp_warnings;
        }
        const PixelBox clamped = clamp_to_image(b, image_width, image_height);
        if (clamped != b) ++out.clamp_warnings;
        if (clamped.empty()) continue;  // fully outside; already counted
        f.boxes.push_back(Detection{clamped, conf, DetectionSource::kExternal});
      }
      out.frames.push_back(std::move(f));
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Annotations JSONL: one record per frame.
// ---------------------------------------------------------------------------

inline json to_json(const Annotation& a) {
  return json{{"frame_id", a.frame_id},
              {"gt_box", to_json(a.gt_box)},
              {"target_position", to_json(a.target_position)},
              {"occlusion_fraction", a.occlusion_fraction}};
}

inline void write_annotations_jsonl(const std::filesystem::path& path,
                                    std::span<const Annotation> annotations) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& a : annotations) out << to_json(a).dump() << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<Annotation> read_annotations_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Annotation> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      Annotation a;
      a.frame_id = j.at("frame_id").get<std::int64_t>();
      a.gt_box = pixelbox_from_json(j.at("gt_box"));
      a.target_position = point3d_from_json(j.at("target_position"));
      a.occlusion_fraction = j.value("occlusion_fraction", 0.0);
      out.push_back(a);
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Localized detections JSONL: one record per detection.
// ---------------------------------------------------------------------------

struct LocalizedRecord {
  std::int64_t frame_id = 0;
  LocalizedDetection loc;
};

inline void write_localized_jsonl(const std::filesystem::path& path,
                                  std::span<const LocalizedRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& r : records) {
    out << json{{"frame_id", r.frame_id},
                {"box", to_json(r.loc.detection.box)},
                {"pixel", json::array({r.loc.u, r.loc.v})},
                {"z_ref", r.loc.z_ref},
                {"xyz", to_json(r.loc.position)},
                {"confidence", r.loc.detection.confidence},
                {"source",
                 r.loc.detection.source == DetectionSource::kNative ? "native"
                                                                    : "external"}}
               .dump()
        << "\n";
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<LocalizedRecord> read_localized_jsonl(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<LocalizedRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      LocalizedRecord r;
      r.frame_id = j.at("frame_id").get<std::int64_t>();
      r.loc.detection.box = pixelbox_from_json(j.at("box"));
      r.loc.detection.confidence = j.value("confidence", 1.0);
      r.loc.detection.source = j.value("source", std::string("external")) == "native"
                                   ? DetectionSource::kNative
                                   : DetectionSource::kExternal;
      r.loc.u = j.at("pixel").at(0).get<int>();
      r.loc.v = j.at("pixel").at(1).get<int>();
      r.loc.z_ref = j.at("z_ref").get<double>();
      r.loc.position = point3d_from_json(j.at("xyz"));
      out.push_back(r);
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace depthsight
