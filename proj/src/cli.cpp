#include "vkf/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "vkf/pipeline.hpp"
#include "vkf/synthgen.hpp"
#include "vkf/viz.hpp"

namespace vkf {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RoomBounds parse_box(const std::string& text, const char* flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": '" + item + "' is not a number");
    }
  }
  if (v.size() != 6) throw UsageError(std::string(flag) + " expects xmin,ymin,zmin,xmax,ymax,zmax");
  RoomBounds box{Point3(v[0], v[1], v[2]), Point3(v[3], v[4], v[5])};
  if (!box.valid()) throw UsageError(std::string(flag) + ": max must exceed min on every axis");
  return box;
}

// Turns `--config FILE` of the subcommand into leading `--key=value` tokens,
// so flags given on the command line (parsed later) take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.empty()) return args;
  const std::string& sub = args[0];
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config requires a file");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return args;
  if (!fs::exists(config_path)) throw UsageError("config file not found: " + config_path);

  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(config_path);
  } catch (const CLI::Error& e) {
    throw UsageError("cannot read config " + config_path + ": " + e.what());
  }
  std::vector<std::string> out{sub};
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() && item.parents.front() != sub) continue;
    if (item.inputs.empty()) {
      out.push_back("--" + item.name);
      continue;
    }
    std::string value = item.inputs.front();
    for (std::size_t k = 1; k < item.inputs.size(); ++k) value += "," + item.inputs[k];
    out.push_back("--" + item.name + "=" + value);
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

struct FusionFlags {
  RunConfig cfg;
  std::string bounds;
  int jobs = 1;

  void add_to(CLI::App* app) {
    auto& f = cfg.fusion;
    app->add_option("--voxel-size", f.grid.voxel_size, "voxel edge length in mm")->capture_default_str();
    app->add_option("--peak-threshold", f.grid.peak_threshold, "minimum fused score of a proposal")
        ->capture_default_str();
    app->add_option("--max-proposals", f.grid.max_proposals, "proposals kept per joint")->capture_default_str();
    app->add_option("--bounds", bounds, "voxel room xmin,ymin,zmin,xmax,ymax,zmax in mm (default: dataset room)");
    app->add_flag("--normalize-visible", f.grid.normalize_visible,
                  "divide by the views seeing a voxel instead of all views");
    app->add_option("--threads", f.grid.threads, "projection threads per frame (0 = all cores)")
        ->capture_default_str();
    app->add_option("--sigma", f.heatmap.sigma_px, "heatmap Gaussian sigma in pixels")->capture_default_str();
    app->add_option("--stride", f.heatmap.stride, "heatmap downsampling factor")->capture_default_str();
    app->add_flag("--unit-peaks", f.heatmap.unit_peaks, "ignore keypoint confidences");
    app->add_option("--center-outlier", f.persons.center_outlier_mm, "max joint distance from person center (mm)")
        ->capture_default_str();
    app->add_option("--limb-max-dist", f.persons.limb_max_dist_mm, "max joint distance from its parent (mm)")
        ->capture_default_str();
    app->add_option("--fine-limb-max-dist", f.persons.fine_limb_max_dist_mm,
                    "parent distance for face and hand joints (mm)")
        ->capture_default_str();
    app->add_option("--min-joints", f.persons.min_joints, "drop persons with fewer joints")->capture_default_str();
    app->add_option("--merge-overlap", f.persons.merge_overlap, "id overlap ratio above which groups merge")
        ->capture_default_str();
    app->add_flag("--exclusive-proposals,!--shared-proposals", f.persons.exclusive_proposals,
                  "a proposal belongs to at most one person");
    app->add_flag("--exclusive-detections,!--shared-detections", f.persons.exclusive_detections,
                  "drop persons explained by detections of stronger persons");
    app->add_flag("--use-depth", cfg.depth.enabled, "mask the voxel grid with depth occupancy");
    app->add_option("--depth-min-points", cfg.depth.mask.min_points, "points for a filled voxel")
        ->capture_default_str();
    app->add_option("--depth-dilation", cfg.depth.mask.dilation, "mask dilation steps")->capture_default_str();
    app->add_option("--depth-stride", cfg.depth.mask.pixel_stride, "use every n-th depth pixel")
        ->capture_default_str();
    app->add_option("--depth-max-dt", cfg.depth.max_dt_s, "depth stream pairing tolerance (s)")
        ->capture_default_str();
    app->add_option("--cameras", cfg.cameras, "use only the first k detection cameras (0 = all)")
        ->capture_default_str();
    app->add_option("--jobs", jobs, "frames processed in parallel")->capture_default_str();
  }

  RunConfig resolve() {
    if (!bounds.empty()) cfg.bounds = parse_box(bounds, "--bounds");
    if (jobs < 1) throw UsageError("--jobs must be at least 1");
    try {
      validate_run_config(cfg);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

fs::path base_dir_of(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("error writing " + path.string());
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return out;
}

const FrameDoc& find_frame(const DatasetDoc& doc, const std::string& id) {
  for (const FrameDoc& f : doc.frames) {
    if (f.id == id) return f;
  }
  throw DataError("/frames", "unknown frame '" + id + "'");
}

void dump_heatmaps(const DatasetDoc& doc, const RunConfig& cfg, const fs::path& dir) {
  fs::create_directories(dir);
  const SkeletonDef skel = skeleton_by_name(doc.skeleton);
  for (const FrameDoc& frame : doc.frames) {
    for (const ViewInput& view : frame_views(doc, frame)) {
      const RenderedView r = render_view(view.detections, skel, {view.calib.width, view.calib.height},
                                         cfg.fusion.heatmap);
      const std::string stem = sanitize(frame.id) + "_" + sanitize(view.calib.camera_id);
      write_png8(dir / (stem + "_heat.png"), heatmap_image(r.heatmaps));
      write_png8(dir / (stem + "_ids.png"), id_image(r.ids));
    }
  }
}

int cmd_fuse(const std::string& dataset, const std::string& output, FusionFlags& flags,
             const std::string& dump_dir, std::ostream& out) {
  const RunConfig cfg = flags.resolve();
  const DatasetDoc doc = read_dataset(dataset);
  if (!dump_dir.empty()) dump_heatmaps(doc, cfg, dump_dir);
  const DatasetRun run = fuse_dataset(doc, base_dir_of(dataset), cfg, flags.jobs);
  const json j = predictions_to_json(run.predictions);
  if (output == "-") {
    out << j.dump(1) << '\n';
  } else {
    write_json_file(j, output);
    std::size_t persons = 0;
    for (const auto& f : run.predictions.frames) persons += f.poses.size();
    out << "fused " << run.predictions.frames.size() << " frames, " << persons << " persons -> " << output
        << '\n';
  }
  return kExitOk;
}

int cmd_eval(const std::string& predictions, const std::string& dataset, const std::string& json_out,
             std::ostream& out) {
  const PredictionsDoc preds = read_predictions(predictions);
  const DatasetDoc doc = read_dataset(dataset);
  const MetricReport report = evaluate(preds, doc);
  out << report_table(report);
  if (!json_out.empty()) write_json_file(report_to_json(report), json_out);
  return kExitOk;
}

int cmd_synth(SynthConfig cfg, const std::string& output, const std::string& room, const std::string& style,
              bool depth_png, std::ostream& out) {
  if (!room.empty()) cfg.room = parse_box(room, "--room");
  try {
    cfg.style = rig_style_from_string(style);
    skeleton_by_name(cfg.skeleton);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (cfg.frames < 0 || cfg.persons < 0 || cfg.cameras < 2 || cfg.depth_cameras < 1 ||
      cfg.points_per_joint < 0) {
    throw UsageError("synth: counts must be non-negative, with at least two cameras and one depth camera");
  }
  if (cfg.dropout < 0.0 || cfg.dropout > 1.0 || cfg.jitter_px < 0.0 || cfg.pose_noise_mm < 0.0) {
    throw UsageError("synth: dropout must be in [0, 1], jitter and pose noise non-negative");
  }

  DatasetDoc doc;
  try {
    doc = make_dataset(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const fs::path out_path(output);
  if (depth_png) {
    const fs::path base = out_path.parent_path();
    const fs::path rel = "depth";
    fs::create_directories(base / rel);
    for (FrameDoc& frame : doc.frames) {
      for (ViewDoc& view : frame.views) {
        if (!view.depth || !view.depth->points) continue;
        const CameraDoc* cam = doc.find_camera(view.camera);
        const DepthImage img = rasterize_depth(*view.depth->points, cam->calib);
        const fs::path file = rel / (sanitize(frame.id) + "_" + sanitize(view.camera) + ".png");
        write_png16(base / file, GrayImage<std::uint16_t>{img.width, img.height, img.depth_mm});
        view.depth = DepthRef{file.generic_string(), std::nullopt};
      }
    }
  }
  write_dataset(doc, out_path);
  out << "wrote " << doc.frames.size() << " frames, " << doc.cameras.size() << " cameras -> " << output << '\n';
  return kExitOk;
}

int cmd_bench(const std::string& dataset, FusionFlags& flags, int repeat, const std::string& json_out,
              std::ostream& out) {
  const RunConfig cfg = flags.resolve();
  if (repeat < 1) throw UsageError("--repeat must be at least 1");
  const DatasetDoc doc = read_dataset(dataset);
  const FusionConfig fusion = effective_fusion(cfg, doc);
  const GridGeometry geom = GridGeometry::make(fusion.grid.bounds, fusion.grid.voxel_size);

  StageTimings sum;
  double mask_sum = 0.0;
  std::size_t runs = 0;
  std::string first_output;
  bool deterministic = true;
  for (int r = 0; r < repeat; ++r) {
    const DatasetRun run = fuse_dataset(doc, base_dir_of(dataset), cfg, 1);
    const std::string dump = predictions_to_json(run.predictions).dump();
    if (r == 0) first_output = dump;
    deterministic = deterministic && dump == first_output;
    for (std::size_t i = 0; i < run.timings.size(); ++i) {
      sum.heatmaps_ms += run.timings[i].heatmaps_ms;
      sum.projection_ms += run.timings[i].projection_ms;
      sum.peaks_ms += run.timings[i].peaks_ms;
      sum.grouping_ms += run.timings[i].grouping_ms;
      mask_sum += run.mask_ms[i];
      ++runs;
    }
  }
  const double n = std::max<double>(1.0, static_cast<double>(runs));
  const double total = (sum.total_ms() + mask_sum) / n;
  const json report = {
      {"frames", doc.frames.size()},
      {"repeat", repeat},
      {"voxels", geom.voxel_count()},
      {"voxel_size", fusion.grid.voxel_size},
      {"stage_ms",
       {{"heatmaps", sum.heatmaps_ms / n},
        {"depth_mask", mask_sum / n},
        {"projection", sum.projection_ms / n},
        {"peaks", sum.peaks_ms / n},
        {"grouping", sum.grouping_ms / n}}},
      {"total_ms", total},
      {"fps", total > 0.0 ? 1000.0 / total : 0.0},
      {"deterministic", deterministic},
  };
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "frames %zu x %d, voxels %zu (%.0f mm)\n"
                "  heatmaps   %9.2f ms\n  depth mask %9.2f ms\n  projection %9.2f ms\n"
                "  peaks      %9.2f ms\n  grouping   %9.2f ms\n  total      %9.2f ms  (%.2f fps)\n",
                doc.frames.size(), repeat, geom.voxel_count(), fusion.grid.voxel_size, sum.heatmaps_ms / n,
                mask_sum / n, sum.projection_ms / n, sum.peaks_ms / n, sum.grouping_ms / n, total,
                total > 0.0 ? 1000.0 / total : 0.0);
  out << buf;
  if (!deterministic) out << "warning: outputs differed between repeats\n";
  if (!json_out.empty()) write_json_file(report, json_out);
  return kExitOk;
}

int cmd_viz(const std::string& predictions, const std::string& dataset, const std::string& frame_id,
            const std::string& out_dir, std::string camera, std::optional<double> slice_z, std::ostream& out) {
  const PredictionsDoc preds = read_predictions(predictions);
  const DatasetDoc doc = read_dataset(dataset);
  if (preds.skeleton != doc.skeleton) throw DataError("/skeleton", "predictions and dataset skeletons differ");
  const SkeletonDef skel = skeleton_by_name(doc.skeleton);
  const FrameDoc& frame = find_frame(doc, frame_id);
  const auto it = std::find_if(preds.frames.begin(), preds.frames.end(),
                               [&](const FramePrediction& f) { return f.frame_id == frame_id; });
  if (it == preds.frames.end()) throw DataError("/frames", "no prediction for frame '" + frame_id + "'");
  for (const Pose3D& p : it->poses) {
    if (static_cast<int>(p.joints.size()) != skel.joint_count()) {
      throw DataError("/frames", "prediction does not match the skeleton");
    }
  }

  const std::vector<ViewInput> views = frame_views(doc, frame);
  if (camera.empty()) camera = views.front().calib.camera_id;
  const auto view = std::find_if(views.begin(), views.end(),
                                 [&](const ViewInput& v) { return v.calib.camera_id == camera; });
  if (view == views.end()) throw DataError("/cameras", "no detection view '" + camera + "' in frame");

  fs::create_directories(out_dir);
  const std::string stem = sanitize(frame_id);
  const fs::path ply = fs::path(out_dir) / (stem + ".ply");
  const fs::path svg = fs::path(out_dir) / (stem + "_" + sanitize(camera) + ".svg");
  write_text(ply, poses_to_ply(it->poses, skel));
  write_text(svg, overlay_svg(view->calib, view->detections, it->poses, skel));
  out << "wrote " << ply.string() << " (" << skeleton_edge_count(it->poses, skel) << " edges)\n";
  out << "wrote " << svg.string() << '\n';

  if (slice_z) {
    const RunConfig cfg = run_config_from_json(preds.config);
    const FusionConfig fusion = effective_fusion(cfg, doc);
    const FrameInputs in = prepare_frame(doc, frame, cfg, fusion, base_dir_of(dataset));
    const FuseResult r = fuse_frame(in.views, skel, fusion, in.mask ? &*in.mask : nullptr, true);
    GrayImage<std::uint8_t> slice;
    try {
      slice = grid_slice(*r.grid, *slice_z);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--slice-z: ") + e.what());
    }
    const fs::path png = fs::path(out_dir) / (stem + "_slice.png");
    write_png8(png, slice);
    out << "wrote " << png.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learning-free multi-view 3D human pose fusion"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  FusionFlags fuse_flags, bench_flags;
  std::string dataset, predictions, output, dump_dir, json_out, frame_id, out_dir, camera;
  std::string room, style = "ring";
  bool depth_png = false;
  int repeat = 1;
  std::optional<double> slice_z;
  SynthConfig synth;

  const std::string config_help = "key = value file mirroring the flags (flags win)";

  auto* fuse = app.add_subcommand("fuse", "fuse a dataset into 3D poses");
  fuse->add_option("dataset", dataset, "dataset JSON")->required();
  fuse->add_option("-o,--output", output, "predictions JSON ('-' for stdout)")->required();
  fuse->add_option("--dump-heatmaps", dump_dir, "write per-view heatmap and id images here");
  fuse->add_option("--config", config_help);
  fuse_flags.add_to(fuse);

  auto* eval = app.add_subcommand("eval", "evaluate predictions against dataset labels");
  eval->add_option("predictions", predictions, "predictions JSON")->required();
  eval->add_option("dataset", dataset, "dataset JSON")->required();
  eval->add_option("--json", json_out, "also write the report as JSON");
  eval->add_option("--config", config_help);

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("-o,--output", output, "dataset JSON")->required();
  synth_cmd->add_option("--name", synth.name)->capture_default_str();
  synth_cmd->add_option("--skeleton", synth.skeleton, "body13 | coco17 | wholebody133")->capture_default_str();
  synth_cmd->add_option("--frames", synth.frames)->capture_default_str();
  synth_cmd->add_option("--persons", synth.persons)->capture_default_str();
  synth_cmd->add_option("--cameras", synth.cameras)->capture_default_str();
  synth_cmd->add_option("--style", style, "ring | corners")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--room", room, "xmin,ymin,zmin,xmax,ymax,zmax in mm");
  synth_cmd->add_option("--jitter", synth.jitter_px, "mean 2D keypoint offset in pixels")->capture_default_str();
  synth_cmd->add_option("--dropout", synth.dropout, "probability of dropping a keypoint")->capture_default_str();
  synth_cmd->add_option("--pose-noise", synth.pose_noise_mm, "3D joint noise in mm")->capture_default_str();
  synth_cmd->add_option("--min-separation", synth.min_separation_mm, "min distance between persons (mm)")
      ->capture_default_str();
  synth_cmd->add_flag("--depth", synth.depth, "add depth-only cameras with depth points");
  synth_cmd->add_option("--depth-cameras", synth.depth_cameras)->capture_default_str();
  synth_cmd->add_option("--points-per-joint", synth.points_per_joint)->capture_default_str();
  synth_cmd->add_flag("--depth-png", depth_png, "store depth as 16-bit PNG images instead of points");
  synth_cmd->add_flag("--ghost", synth.ghost, "two-person phantom scenario with a fixed rig");
  synth_cmd->add_option("--config", config_help);

  auto* bench = app.add_subcommand("bench", "time the pipeline stages");
  bench->add_option("dataset", dataset, "dataset JSON")->required();
  bench->add_option("--repeat", repeat, "passes over the dataset")->capture_default_str();
  bench->add_option("--json", json_out, "also write the timings as JSON");
  bench->add_option("--config", config_help);
  bench_flags.add_to(bench);

  auto* viz = app.add_subcommand("viz", "export PLY, SVG and voxel slice for one frame");
  viz->add_option("predictions", predictions, "predictions JSON")->required();
  viz->add_option("dataset", dataset, "dataset JSON")->required();
  viz->add_option("--frame", frame_id, "frame id")->required();
  viz->add_option("--out-dir", out_dir, "output directory")->required();
  viz->add_option("--camera", camera, "camera of the 2D overlay (default: first)");
  viz->add_option("--slice-z", slice_z, "also write the fused score layer at this height (mm)");
  viz->add_option("--config", config_help);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (fuse->parsed()) return cmd_fuse(dataset, output, fuse_flags, dump_dir, out);
    if (eval->parsed()) return cmd_eval(predictions, dataset, json_out, out);
    if (synth_cmd->parsed()) return cmd_synth(synth, output, room, style, depth_png, out);
    if (bench->parsed()) return cmd_bench(dataset, bench_flags, repeat, json_out, out);
    if (viz->parsed()) return cmd_viz(predictions, dataset, frame_id, out_dir, camera, slice_z, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace vkf
