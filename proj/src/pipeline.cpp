#include "vkf/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

namespace vkf {

namespace {

using json = nlohmann::json;

json point_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

Point3 point_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected [x, y, z]");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

template <typename T>
void read_key(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

void validate_run_config(const RunConfig& cfg) {
  const auto& f = cfg.fusion;
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (!(f.heatmap.sigma_px > 0.0)) fail("sigma must be positive");
  if (f.heatmap.stride < 1) fail("heatmap stride must be at least 1");
  if (!(f.grid.voxel_size > 0.0)) fail("voxel size must be positive");
  if (!(f.grid.peak_threshold > 0.0 && f.grid.peak_threshold <= 1.0)) {
    fail("peak threshold must be in (0, 1]");
  }
  if (f.grid.max_proposals < 1) fail("max proposals must be at least 1");
  if (f.grid.threads < 0) fail("thread count must not be negative");
  if (!(f.persons.center_outlier_mm > 0.0)) fail("center outlier distance must be positive");
  if (!(f.persons.limb_max_dist_mm > 0.0) || !(f.persons.fine_limb_max_dist_mm > 0.0)) {
    fail("limb distances must be positive");
  }
  if (f.persons.min_joints < 1) fail("min joints must be at least 1");
  if (!(f.persons.merge_overlap >= 0.0 && f.persons.merge_overlap < 1.0)) {
    fail("merge overlap must be in [0, 1)");
  }
  if (cfg.bounds && !cfg.bounds->valid()) fail("bounds must have max > min on every axis");
  if (cfg.depth.mask.min_points < 1) fail("depth min points must be at least 1");
  if (cfg.depth.mask.dilation < 0) fail("depth dilation must not be negative");
  if (cfg.depth.mask.pixel_stride < 1) fail("depth pixel stride must be at least 1");
  if (!(cfg.depth.max_dt_s > 0.0)) fail("depth max dt must be positive");
  if (cfg.cameras != 0 && cfg.cameras < 2) fail("camera subset needs at least two cameras");
}

json run_config_to_json(const RunConfig& cfg) {
  const auto& f = cfg.fusion;
  json grid = {{"voxel_size", f.grid.voxel_size},
               {"peak_threshold", f.grid.peak_threshold},
               {"max_proposals", f.grid.max_proposals},
               {"normalize_visible", f.grid.normalize_visible}};
  if (cfg.bounds) grid["bounds"] = {{"min", point_json(cfg.bounds->min)}, {"max", point_json(cfg.bounds->max)}};
  return {
      {"heatmap",
       {{"sigma_px", f.heatmap.sigma_px}, {"stride", f.heatmap.stride}, {"unit_peaks", f.heatmap.unit_peaks}}},
      {"grid", grid},
      {"persons",
       {{"center_outlier_mm", f.persons.center_outlier_mm},
        {"limb_max_dist_mm", f.persons.limb_max_dist_mm},
        {"fine_limb_max_dist_mm", f.persons.fine_limb_max_dist_mm},
        {"min_joints", f.persons.min_joints},
        {"merge_overlap", f.persons.merge_overlap},
        {"exclusive_proposals", f.persons.exclusive_proposals},
        {"exclusive_detections", f.persons.exclusive_detections}}},
      {"depth",
       {{"enabled", cfg.depth.enabled},
        {"min_points", cfg.depth.mask.min_points},
        {"dilation", cfg.depth.mask.dilation},
        {"pixel_stride", cfg.depth.mask.pixel_stride},
        {"max_dt_s", cfg.depth.max_dt_s}}},
      {"cameras", cfg.cameras},
  };
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  if (!j.is_object()) throw DataError("/config", "expected an object");
  try {
    auto& f = cfg.fusion;
    if (j.contains("heatmap")) {
      const json& h = j.at("heatmap");
      read_key(h, "sigma_px", f.heatmap.sigma_px);
      read_key(h, "stride", f.heatmap.stride);
      read_key(h, "unit_peaks", f.heatmap.unit_peaks);
    }
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      read_key(g, "voxel_size", f.grid.voxel_size);
      read_key(g, "peak_threshold", f.grid.peak_threshold);
      read_key(g, "max_proposals", f.grid.max_proposals);
      read_key(g, "normalize_visible", f.grid.normalize_visible);
      if (g.contains("bounds")) {
        cfg.bounds = RoomBounds{point_from(g.at("bounds").at("min")), point_from(g.at("bounds").at("max"))};
      }
    }
    if (j.contains("persons")) {
      const json& p = j.at("persons");
      read_key(p, "center_outlier_mm", f.persons.center_outlier_mm);
      read_key(p, "limb_max_dist_mm", f.persons.limb_max_dist_mm);
      read_key(p, "fine_limb_max_dist_mm", f.persons.fine_limb_max_dist_mm);
      read_key(p, "min_joints", f.persons.min_joints);
      read_key(p, "merge_overlap", f.persons.merge_overlap);
      read_key(p, "exclusive_proposals", f.persons.exclusive_proposals);
      read_key(p, "exclusive_detections", f.persons.exclusive_detections);
    }
    if (j.contains("depth")) {
      const json& d = j.at("depth");
      read_key(d, "enabled", cfg.depth.enabled);
      read_key(d, "min_points", cfg.depth.mask.min_points);
      read_key(d, "dilation", cfg.depth.mask.dilation);
      read_key(d, "pixel_stride", cfg.depth.mask.pixel_stride);
      read_key(d, "max_dt_s", cfg.depth.max_dt_s);
    }
    read_key(j, "cameras", cfg.cameras);
  } catch (const json::exception& e) {
    throw DataError("/config", e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError("/config", e.what());
  }
  return cfg;
}

FusionConfig effective_fusion(const RunConfig& cfg, const DatasetDoc& doc) {
  FusionConfig f = cfg.fusion;
  f.grid.bounds = cfg.bounds.value_or(doc.room);
  return f;
}

FrameInputs prepare_frame(const DatasetDoc& doc, const FrameDoc& frame, const RunConfig& cfg,
                          const FusionConfig& fusion, const std::filesystem::path& base_dir) {
  FrameInputs in;
  in.views = frame_views(doc, frame);
  if (cfg.cameras > 0) {
    std::set<std::string> allowed;
    for (const CameraDoc& cam : doc.cameras) {
      if (cam.depth_only) continue;
      if (static_cast<int>(allowed.size()) == cfg.cameras) break;
      allowed.insert(cam.calib.camera_id);
    }
    if (static_cast<int>(allowed.size()) < cfg.cameras) {
      throw DataError("/cameras", "dataset has fewer than " + std::to_string(cfg.cameras) +
                                      " detection cameras");
    }
    std::erase_if(in.views, [&](const ViewInput& v) { return !allowed.contains(v.calib.camera_id); });
    if (in.views.size() < 2) {
      throw DataError("/frames/" + frame.id, "fewer than two selected views carry detections");
    }
  }
  if (cfg.depth.enabled) {
    std::vector<DepthFrame> depth;
    for (const ViewDoc& v : frame.views) {
      if (v.depth) depth.push_back(load_depth(v.camera, *v.depth, base_dir));
    }
    if (!depth.empty()) {
      const std::vector<CameraCalib> calibs = doc.calibs();
      try {
        in.mask = build_mask(depth, calibs, GridGeometry::make(fusion.grid.bounds, fusion.grid.voxel_size),
                             cfg.depth.mask);
      } catch (const std::invalid_argument& e) {
        throw DataError("/frames/" + frame.id, e.what());
      }
    }
  }
  return in;
}

DatasetRun fuse_dataset(const DatasetDoc& doc, const std::filesystem::path& base_dir,
                        const RunConfig& cfg, int jobs) {
  validate_run_config(cfg);
  const SkeletonDef skel = skeleton_by_name(doc.skeleton);
  const FusionConfig fusion = effective_fusion(cfg, doc);
  std::vector<FrameDoc> frames = doc.frames;
  if (cfg.depth.enabled && !doc.depth_stream.empty()) {
    frames = pair_depth(std::move(frames), doc.depth_stream, cfg.depth.max_dt_s);
  }

  DatasetRun run;
  RunConfig resolved = cfg;
  resolved.bounds = fusion.grid.bounds;
  run.predictions.skeleton = doc.skeleton;
  run.predictions.config = run_config_to_json(resolved);
  run.predictions.frames.resize(frames.size());
  run.timings.resize(frames.size());
  run.mask_ms.assign(frames.size(), 0.0);

  std::vector<std::exception_ptr> errors(frames.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < frames.size(); i = next++) {
      try {
        const auto t0 = std::chrono::steady_clock::now();
        FrameInputs in = prepare_frame(doc, frames[i], cfg, fusion, base_dir);
        run.mask_ms[i] = in.mask ? elapsed_ms(t0) : 0.0;
        FuseResult r = fuse_frame(in.views, skel, fusion, in.mask ? &*in.mask : nullptr);
        run.predictions.frames[i] = {frames[i].id, std::move(r.poses)};
        run.timings[i] = r.timings;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(frames.size(), 1)));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return run;
}

MetricReport evaluate(const PredictionsDoc& predictions, const DatasetDoc& doc) {
  if (predictions.skeleton != doc.skeleton) {
    throw DataError("/skeleton", "predictions use skeleton '" + predictions.skeleton +
                                     "' but the dataset uses '" + doc.skeleton + "'");
  }
  const SkeletonDef skel = skeleton_by_name(doc.skeleton);
  std::map<std::string, const FramePrediction*> by_frame;
  for (std::size_t i = 0; i < predictions.frames.size(); ++i) {
    const FramePrediction& f = predictions.frames[i];
    if (!by_frame.emplace(f.frame_id, &f).second) {
      throw DataError("/frames/" + std::to_string(i), "duplicate prediction for frame '" + f.frame_id + "'");
    }
    for (std::size_t k = 0; k < f.poses.size(); ++k) {
      if (static_cast<int>(f.poses[k].joints.size()) != skel.joint_count()) {
        throw DataError("/frames/" + std::to_string(i) + "/persons/" + std::to_string(k),
                        "joint count does not match skeleton");
      }
    }
  }
  for (const auto& [id, f] : by_frame) {
    const bool known = std::any_of(doc.frames.begin(), doc.frames.end(),
                                   [&](const FrameDoc& fd) { return fd.id == id; });
    if (!known) throw DataError("/frames", "prediction for unknown frame '" + id + "'");
  }

  MetricCounts total;
  for (const FrameDoc& frame : doc.frames) {
    std::vector<EvalPose> preds, gts;
    if (auto it = by_frame.find(frame.id); it != by_frame.end()) {
      for (const Pose3D& p : it->second->poses) preds.push_back(to_eval_pose(p));
    }
    for (const LabelDoc& l : frame.labels) gts.push_back({l.joints, 1.0});
    total.add(count_frame(preds, gts, skel));
  }
  return make_report(total, skel);
}

}  // namespace vkf
