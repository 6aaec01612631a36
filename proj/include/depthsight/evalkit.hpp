// Copyright 2026 the depthsight authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "depthsight/box.hpp"
#include "depthsight/detector.hpp"
#include "depthsight/errors.hpp"
#include "depthsight/localizer.hpp"
#include "depthsight/synth.hpp"
#include "depthsight/version.hpp"

namespace depthsight {

// ---------------------------------------------------------------------------
// Frame-level matching
// ---------------------------------------------------------------------------

struct MatchSpec {
  double iou_threshold = 0.5;
  double confidence_threshold = 0.7;

  void validate() const {
    if (iou_threshold < 0 || iou_threshold > 1)
      throw ConfigError("match: iou_threshold outside [0, 1]");
    if (confidence_threshold < 0 || confidence_threshold > 1)
      throw ConfigError("match: confidence_threshold outside [0, 1]");
  }
};

enum class FrameOutcome { kTruePositive, kFalsePositive, kFalseNegative, kTrueNegative };

/// Classify one frame. Detections must already be confidence-filtered.
/// TP: some detection overlaps the ground-truth box with IoU >= threshold.
/// FP: detections exist but none matches (or there is no ground truth).
/// FN: ground truth present, no detections. TN: neither.
inline FrameOutcome match_frame(std::span<const Detection> dets, const PixelBox& gt_box,
                                const MatchSpec& spec) {
  spec.validate();
  const bool gt_present = !gt_box.empty();
  if (dets.empty()) {
    return gt_present ? FrameOutcome::kFalseNegative : FrameOutcome::kTrueNegative;
  }
  if (gt_present) {
    for (const auto& d : dets) {
      if (iou(d.box, gt_box) >= spec.iou_threshold) return FrameOutcome::kTruePositive;
    }
  }
  return FrameOutcome::kFalsePositive;
}

// ---------------------------------------------------------------------------
// Sequence metrics (frame-level precision and recall, in percent)
// ---------------------------------------------------------------------------

struct SequenceResult {
  std::string name;
  int n_frames = 0;
  int tp_frames = 0;
  int fp_frames = 0;
  int fn_frames = 0;
  double precision = std::numeric_limits<double>::quiet_NaN();  // percent
  double recall = std::numeric_limits<double>::quiet_NaN();     // percent
  bool precision_defined = false;
  bool recall_defined = false;
};

inline SequenceResult sequence_metrics(std::string name, int n_frames, int tp, int fp,
                                       int fn) {
  SequenceResult r;
  r.name = std::move(name);
  r.n_frames = n_frames;
  r.tp_frames = tp;
  r.fp_frames = fp;
  r.fn_frames = fn;
  if (tp + fp > 0) {
    r.precision = 100.0 * tp / (tp + fp);
    r.precision_defined = true;
  }
  if (tp + fn > 0) {
    r.recall = 100.0 * tp / (tp + fn);
    r.recall_defined = true;
  }
  return r;
}

inline SequenceResult sequence_metrics(std::string name,
                                       std::span<const FrameOutcome> frames) {
  if (frames.empty()) throw DataError("sequence_metrics: no frames");
  int tp = 0, fp = 0, fn = 0;
  for (const FrameOutcome o : frames) {
    if (o == FrameOutcome::kTruePositive) ++tp;
    else if (o == FrameOutcome::kFalsePositive) ++fp;
    else if (o == FrameOutcome::kFalseNegative) ++fn;
  }
  return sequence_metrics(std::move(name), static_cast<int>(frames.size()), tp, fp, fn);
}

enum class AggregateMode { kUnweighted, kFrameWeighted };

struct AggregateResult {
  double precision = std::numeric_limits<double>::quiet_NaN();
  double recall = std::numeric_limits<double>::quiet_NaN();
  bool precision_defined = false;
  bool recall_defined = false;
};

/// Average per-sequence percentages. Unweighted: plain mean. Frame-weighted:
/// weighted by n_frames. Sequences whose metric is undefined are skipped for
/// that metric.
inline AggregateResult aggregate(std::span<const SequenceResult> results,
                                 AggregateMode mode) {
  if (results.empty()) throw DataError("aggregate: no sequences");
  AggregateResult agg;
  double p_sum = 0, p_weight = 0, r_sum = 0, r_weight = 0;
  for (const auto& s : results) {
    const double w =
        mode == AggregateMode::kFrameWeighted ? static_cast<double>(s.n_frames) : 1.0;
    if (s.precision_defined) {
      p_sum += w * s.precision;
      p_weight += w;
    }
    if (s.recall_defined) {
      r_sum += w * s.recall;
      r_weight += w;
    }
  }
  if (p_weight > 0) {
    agg.precision = p_sum / p_weight;
    agg.precision_defined = true;
  }
  if (r_weight > 0) {
    agg.recall = r_sum / r_weight;
    agg.recall_defined = true;
  }
  return agg;
}

// ---------------------------------------------------------------------------
// Depth-error study
// ---------------------------------------------------------------------------

struct DepthErrorResult {
  double hover_distance_mm = 0;
  ZrefMethod method = ZrefMethod::kMinDepth;
  double rmse_mm = std::numeric_limits<double>::quiet_NaN();
  double min_error_mm = std::numeric_limits<double>::quiet_NaN();
  double max_error_mm = std::numeric_limits<double>::quiet_NaN();
  int n_samples = 0;   // requested
  int n_detected = 0;  // frames that yielded a detection
  bool insufficient_detections = false;
};

/// One hover group: repeated frames of a static target.
struct HoverFrames {
  double hover_distance_m = 0;
  double true_z_m = 0;
  std::vector<DepthMap> frames;
};

/// Score each Z_ref method over repeated detections of static hover frames.
/// Per frame the highest-confidence detection is localized; frames without a
/// detection are skipped and counted. Errors are |z - z_true| in mm.
inline std::vector<DepthErrorResult> depth_error_study_on_frames(
    std::span<const HoverFrames> groups, const StereoRig& rig,
    const DetectorParams& det_params, std::span<const ZrefMethod> methods,
    int n_samples) {
  if (n_samples < 1) throw ConfigError("depth study: n_samples must be >= 1");
  std::vector<DepthErrorResult> out;
  for (const auto& group : groups) {
    std::vector<std::vector<double>> errors_mm(methods.size());
    int detected = 0;
    for (const auto& frame : group.frames) {
      const std::vector<Detection> dets = detect(frame, det_params);
      if (dets.empty()) continue;
      ++detected;
      const Detection& best = dets.front();  // sorted by confidence
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const LocalizedDetection loc = localize(frame, best, rig, methods[mi]);
        errors_mm[mi].push_back(std::abs(loc.position.z - group.true_z_m) * 1000.0);
      }
    }
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      DepthErrorResult r;
      r.hover_distance_mm = group.hover_distance_m * 1000.0;
      r.method = methods[mi];
      r.n_samples = n_samples;
      r.n_detected = detected;
      r.insufficient_detections = detected < n_samples;
      if (!errors_mm[mi].empty()) {
        double sq = 0, lo = errors_mm[mi][0], hi = errors_mm[mi][0];
        for (const double e : errors_mm[mi]) {
          sq += e * e;
          lo = std::min(lo, e);
          hi = std::max(hi, e);
        }
        r.rmse_mm = std::sqrt(sq / static_cast<double>(errors_mm[mi].size()));
        r.min_error_mm = lo;
        r.max_error_mm = hi;
      }
      out.push_back(r);
    }
  }
  return out;
}

/// Synthetic hover-study protocol: one target model held static at each
/// distance, n_samples frames per distance with independent noise draws.
struct DepthStudySpec {
  StereoRig rig;
  std::vector<Primitive> background;
  DroneModel model = DroneModel::quad_small();
  double target_yaw = 0;
  std::vector<double> hover_distances_m;
  int n_samples = 10;
  NoiseSpec noise;
  // When set, per-group Gaussian sigma follows disparity-quantization
  // propagation: sigma_z = z^2 * sigma_d / (f * T).
  bool disparity_noise_model = false;
  double disparity_sigma_px = 0;
  DetectorParams detector;
  std::vector<ZrefMethod> methods = {ZrefMethod::kMinDepth, ZrefMethod::kMeanBelowQ1,
                                     ZrefMethod::kMedianBelowQ1};
  std::uint64_t seed = 0;

  void validate() const {
    rig.validate();
    for (const auto& p : background) validate_primitive(p);
    model.validate();
    if (hover_distances_m.empty()) throw ConfigError("depth study: no hover distances");
    for (const double d : hover_distances_m) {
      if (!(d > 0)) throw ConfigError("depth study: hover distance must be > 0");
    }
    if (n_samples < 1) throw ConfigError("depth study: n_samples must be >= 1");
    noise.validate();
    if (disparity_noise_model && !(disparity_sigma_px > 0))
      throw ConfigError("depth study: disparity_sigma_px must be > 0");
    detector.validate();
    if (methods.empty()) throw ConfigError("depth study: no methods");
  }
};

inline std::vector<DepthErrorResult> run_depth_study(const DepthStudySpec& study) {
  study.validate();
  std::vector<HoverFrames> groups;
  groups.reserve(study.hover_distances_m.size());
  std::int64_t frame_id = 0;
  for (const double dist : study.hover_distances_m) {
    SceneSpec scene;
    scene.rig = study.rig;
    scene.background = study.background;
    scene.target = study.model;
    scene.target_pose = Pose{{0, 0, dist}, study.target_yaw};
    scene.noise = study.noise;
    if (study.disparity_noise_model) {
      scene.noise.gaussian_sigma = dist * dist * study.disparity_sigma_px /
                                   (study.rig.focal * study.rig.baseline_m);
    }
    scene.seed = study.seed;
    HoverFrames group;
    group.hover_distance_m = dist;
    group.true_z_m = dist;
    group.frames.reserve(study.n_samples);
    for (int s = 0; s < study.n_samples; ++s) {
      group.frames.push_back(render(scene, frame_id++).depth);
    }
    groups.push_back(std::move(group));
  }
  return depth_error_study_on_frames(groups, study.rig, study.detector, study.methods,
                                     study.n_samples);
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

struct ReportProvenance {
  std::string tool_version{kVersion};
  std::string config_hash = "0000000000000000";
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();
};

struct EvalReport {
  std::vector<SequenceResult> sequences;
  std::vector<DepthErrorResult> depth_rows;
  ReportProvenance provenance;
};

namespace detail {

inline std::string format_fixed(double v, int prec) {
  if (std::isnan(v)) return "na";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

inline std::string csv_header_comment(const ReportProvenance& p) {
  return "# depthsight " + std::string(p.tool_version) + " config=" + p.config_hash +
         " seed=" + std::to_string(p.seed) + "\n";
}

inline nlohmann::json to_json(const SequenceResult& s) {
  nlohmann::json j{{"name", s.name},
                   {"n_frames", s.n_frames},
                   {"tp_frames", s.tp_frames},
                   {"fp_frames", s.fp_frames},
                   {"fn_frames", s.fn_frames}};
  j["precision_pct"] = s.precision_defined ? nlohmann::json(s.precision) : nullptr;
  j["recall_pct"] = s.recall_defined ? nlohmann::json(s.recall) : nullptr;
  return j;
}

inline nlohmann::json to_json(const DepthErrorResult& r) {
  nlohmann::json j{{"hover_mm", r.hover_distance_mm},
                   {"method", to_string(r.method)},
                   {"n_samples", r.n_samples},
                   {"n_detected", r.n_detected},
                   {"insufficient_detections", r.insufficient_detections}};
  j["rmse_mm"] = std::isnan(r.rmse_mm) ? nlohmann::json(nullptr) : nlohmann::json(r.rmse_mm);
  j["min_mm"] = std::isnan(r.min_error_mm) ? nlohmann::json(nullptr) : nlohmann::json(r.min_error_mm);
  j["max_mm"] = std::isnan(r.max_error_mm) ? nlohmann::json(nullptr) : nlohmann::json(r.max_error_mm);
  return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << body;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace detail

/// Write sequences.csv / depth_study.csv / report.json under dir. Layouts
/// mirror the study tables: one CSV row per sequence (plus aggregate footer
/// rows in both modes) and one per hover-distance x method. Byte output is
/// deterministic for fixed inputs.
inline void emit_report(const EvalReport& report, const std::filesystem::path& dir) {
  if (report.sequences.empty() && report.depth_rows.empty()) {
    throw DataError("emit_report: nothing to report");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  nlohmann::json root;
  root["tool"] = {{"name", "depthsight"},
                  {"version", report.provenance.tool_version},
                  {"config_hash", report.provenance.config_hash},
                  {"seed", report.provenance.seed}};
  root["params"] = report.provenance.params;

  if (!report.sequences.empty()) {
    std::string csv = detail::csv_header_comment(report.provenance);
    csv += "name,n_frames,tp_frames,fp_frames,fn_frames,precision_pct,recall_pct\n";
    for (const auto& s : report.sequences) {
      csv += s.name + "," + std::to_string(s.n_frames) + "," +
             std::to_string(s.tp_frames) + "," + std::to_string(s.fp_frames) + "," +
             std::to_string(s.fn_frames) + "," + detail::format_fixed(s.precision, 4) +
             "," + detail::format_fixed(s.recall, 4) + "\n";
    }
    int total_frames = 0;
    for (const auto& s : report.sequences) total_frames += s.n_frames;
    const AggregateResult un = aggregate(report.sequences, AggregateMode::kUnweighted);
    const AggregateResult fw = aggregate(report.sequences, AggregateMode::kFrameWeighted);
    csv += "aggregate_unweighted," + std::to_string(total_frames) + ",,,," +
           detail::format_fixed(un.precision, 4) + "," + detail::format_fixed(un.recall, 4) + "\n";
    csv += "aggregate_frame_weighted," + std::to_string(total_frames) + ",,,," +
           detail::format_fixed(fw.precision, 4) + "," + detail::format_fixed(fw.recall, 4) + "\n";
    detail::write_text_file(dir / "sequences.csv", csv);

    nlohmann::json seq_json = nlohmann::json::array();
    for (const auto& s : report.sequences) seq_json.push_back(detail::to_json(s));
    root["sequences"] = seq_json;
    root["aggregates"] = {
        {"unweighted",
         {{"precision_pct", un.precision_defined ? nlohmann::json(un.precision) : nullptr},
          {"recall_pct", un.recall_defined ? nlohmann::json(un.recall) : nullptr}}},
        {"frame_weighted",
         {{"precision_pct", fw.precision_defined ? nlohmann::json(fw.precision) : nullptr},
          {"recall_pct", fw.recall_defined ? nlohmann::json(fw.recall) : nullptr}}},
        {"note", "unweighted and frame-weighted sequence averages generally differ; "
                 "both are reported"}};
  }

  if (!report.depth_rows.empty()) {
    std::string csv = detail::csv_header_comment(report.provenance);
    csv += "hover_mm,method,rmse_mm,min_mm,max_mm,n_samples,n_detected,insufficient\n";
    for (const auto& r : report.depth_rows) {
      csv += detail::format_fixed(r.hover_distance_mm, 1) + "," + to_string(r.method) +
             "," + detail::format_fixed(r.rmse_mm, 3) + "," +
             detail::format_fixed(r.min_error_mm, 3) + "," +
             detail::format_fixed(r.max_error_mm, 3) + "," +
             std::to_string(r.n_samples) + "," + std::to_string(r.n_detected) + "," +
             (r.insufficient_detections ? "1" : "0") + "\n";
    }
    detail::write_text_file(dir / "depth_study.csv", csv);

    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.depth_rows) rows.push_back(detail::to_json(r));
    root["depth_study"] = rows;
  }

  detail::write_text_file(dir / "report.json", root.dump(2) + "\n");
}

}  // namespace depthsight
