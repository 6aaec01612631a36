// Copyright 2026 the depthsight authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "depthsight/errors.hpp"
#include "depthsight/io_image.hpp"
#include "depthsight/io_json.hpp"
#include "depthsight/parallel.hpp"
#include "depthsight/synth.hpp"

namespace depthsight {

/// Dataset directory layout:
///   frames/NNNN.pfm      float depth maps, meters
///   masks/NNNN.pgm       segmentation masks, 255 = target
///   annotations.jsonl    one record per frame
///   rig.json             calibration
///   spec.json            the generating scene spec (provenance)
inline std::string frame_stem(std::int64_t frame_id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04lld", static_cast<long long>(frame_id));
  return buf;
}

struct SequenceSummary {
  std::filesystem::path dir;
  int n_frames = 0;
};

/// Render one frame per pose. Frames are independent: frame i is rendered
/// with seed spec.seed + i, so the result does not depend on the thread
/// count. A pose outside the frustum yields an empty annotation, not an
/// error.
inline SequenceSummary generate_sequence(const SceneSpec& spec,
                                         std::span<const Pose> trajectory,
                                         const std::filesystem::path& out_dir,
                                         int threads = 1) {
  if (trajectory.empty()) throw ConfigError("generate_sequence: empty trajectory");
  spec.validate();

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "frames", ec);
  std::filesystem::create_directories(out_dir / "masks", ec);
  if (ec) throw IoError("cannot create dataset directories under " + out_dir.string());

  const auto n = static_cast<std::int64_t>(trajectory.size());
  std::vector<RenderResult> results(n);
  parallel_for(n, threads, [&](std::int64_t i) {
    SceneSpec frame_spec = spec;
    frame_spec.target_pose = trajectory[i];
    results[i] = render(frame_spec, i);
  });

  std::vector<Annotation> annotations;
  annotations.reserve(n);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::string stem = frame_stem(i);
    write_pfm(out_dir / "frames" / (stem + ".pfm"), results[i].depth);
    write_pgm(out_dir / "masks" / (stem + ".pgm"), results[i].mask);
    annotations.push_back(results[i].annotation);
  }
  write_annotations_jsonl(out_dir / "annotations.jsonl", annotations);
  save_rig(out_dir / "rig.json", spec.rig);

  SceneFile file;
  file.spec = spec;
  file.trajectory.assign(trajectory.begin(), trajectory.end());
  detail::write_json_file(out_dir / "spec.json", to_json(file));

  return SequenceSummary{out_dir, static_cast<int>(n)};
}

struct Dataset {
  std::filesystem::path dir;
  StereoRig rig;
  std::vector<Annotation> annotations;  // one per frame, ascending frame_id

  std::filesystem::path frame_path(std::int64_t frame_id) const {
    return dir / "frames" / (frame_stem(frame_id) + ".pfm");
  }
  DepthMap load_frame(std::int64_t frame_id) const {
    return read_pfm(frame_path(frame_id));
  }
};

inline Dataset load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("dataset directory not found: " + dir.string());
  }
  Dataset ds;
  ds.dir = dir;
  ds.rig = load_rig(dir / "rig.json");
  ds.annotations = read_annotations_jsonl(dir / "annotations.jsonl");
  return ds;
}

}  // namespace depthsight
