#include "vkf/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "vkf/png_io.hpp"

namespace vkf {

using nlohmann::json;

namespace {

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw DataError(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw DataError(child(path, key), "missing required field");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw DataError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw DataError(path, "non-finite number");
  return v;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw DataError(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw DataError(path, "expected a string");
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& path, std::size_t size = 0) {
  if (!j.is_array()) throw DataError(path, "expected an array");
  if (size > 0 && j.size() != size) {
    throw DataError(path, "expected " + std::to_string(size) + " elements, got " +
                              std::to_string(j.size()));
  }
  return j;
}

Point3 as_point(const json& j, const std::string& path) {
  as_array(j, path, 3);
  return {as_number(j[0], child(path, 0)), as_number(j[1], child(path, 1)),
          as_number(j[2], child(path, 2))};
}

json point_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

json extras(const json& j, std::initializer_list<const char*> known) {
  json out = json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; })) {
      out[it.key()] = it.value();
    }
  }
  return out;
}

json with_extras(const json& extra, json known) {
  json out = extra.is_object() ? extra : json::object();
  for (auto it = known.begin(); it != known.end(); ++it) out[it.key()] = it.value();
  return out;
}

Eigen::Matrix3d as_matrix3(const json& j, const std::string& path) {
  as_array(j, path, 3);
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    const std::string row_path = child(path, r);
    as_array(j[r], row_path, 3);
    for (int c = 0; c < 3; ++c) m(r, c) = as_number(j[r][c], child(row_path, c));
  }
  return m;
}

json matrix_json(const Eigen::Matrix3d& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) out.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return out;
}

CameraDoc camera_from_json(const json& j, const std::string& path) {
  CameraDoc cam;
  CameraCalib& c = cam.calib;
  c.camera_id = as_string(require(j, "id", path), child(path, "id"));
  c.K = as_matrix3(require(j, "K", path), child(path, "K"));
  c.R = as_matrix3(require(j, "R", path), child(path, "R"));
  c.t = as_point(require(j, "t", path), child(path, "t"));
  if (j.contains("distortion")) {
    const std::string dp = child(path, "distortion");
    as_array(j["distortion"], dp, 5);
    for (int i = 0; i < 5; ++i) c.distortion[i] = as_number(j["distortion"][i], child(dp, i));
  }
  c.width = as_int(require(j, "width", path), child(path, "width"));
  c.height = as_int(require(j, "height", path), child(path, "height"));
  if (j.contains("depth_only")) {
    if (!j["depth_only"].is_boolean()) throw DataError(child(path, "depth_only"), "expected a bool");
    cam.depth_only = j["depth_only"].get<bool>();
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(path, e.what());
  }
  cam.extra = extras(j, {"id", "K", "R", "t", "distortion", "width", "height", "depth_only"});
  return cam;
}

json camera_to_json(const CameraDoc& cam) {
  const CameraCalib& c = cam.calib;
  json d = json::array();
  for (double v : c.distortion) d.push_back(v);
  json known = {{"id", c.camera_id}, {"K", matrix_json(c.K)}, {"R", matrix_json(c.R)},
                {"t", point_json(c.t)},  {"distortion", d},         {"width", c.width},
                {"height", c.height}};
  if (cam.depth_only) known["depth_only"] = true;
  return with_extras(cam.extra, known);
}

DepthRef depth_from_json(const json& j, const std::string& path) {
  DepthRef ref;
  if (!j.is_object()) throw DataError(path, "expected an object");
  if (j.contains("image")) ref.image = as_string(j["image"], child(path, "image"));
  if (j.contains("points")) {
    const std::string pp = child(path, "points");
    as_array(j["points"], pp);
    std::vector<Point3> pts;
    pts.reserve(j["points"].size());
    for (std::size_t i = 0; i < j["points"].size(); ++i) {
      pts.push_back(as_point(j["points"][i], child(pp, i)));
    }
    ref.points = std::move(pts);
  }
  if (!ref.image && !ref.points) throw DataError(path, "depth needs 'image' or 'points'");
  return ref;
}

json depth_to_json(const DepthRef& ref) {
  json j = json::object();
  if (ref.image) j["image"] = *ref.image;
  if (ref.points) {
    json pts = json::array();
    for (const auto& p : *ref.points) pts.push_back(point_json(p));
    j["points"] = pts;
  }
  return j;
}

Detection2D detection_from_json(const json& j, const std::string& path, const std::string& camera) {
  Detection2D d;
  d.view_id = camera;
  d.person_id = as_int(require(j, "person", path), child(path, "person"));
  const std::string kp_path = child(path, "keypoints");
  const json& kps = as_array(require(j, "keypoints", path), kp_path);
  for (std::size_t i = 0; i < kps.size(); ++i) {
    Keypoint2D kp;
    if (!kps[i].is_null()) {
      const std::string p = child(kp_path, i);
      as_array(kps[i], p, 3);
      kp.u = as_number(kps[i][0], child(p, 0));
      kp.v = as_number(kps[i][1], child(p, 1));
      kp.confidence = as_number(kps[i][2], child(p, 2));
      kp.visible = true;
    }
    d.keypoints.push_back(kp);
  }
  return d;
}

json detection_to_json(const Detection2D& d) {
  json kps = json::array();
  for (const auto& kp : d.keypoints) {
    kps.push_back(kp.visible ? json::array({kp.u, kp.v, kp.confidence}) : json(nullptr));
  }
  return {{"person", d.person_id}, {"keypoints", kps}};
}

ViewDoc view_from_json(const json& j, const std::string& path) {
  ViewDoc v;
  v.camera = as_string(require(j, "camera", path), child(path, "camera"));
  if (j.contains("image")) v.image = as_string(j["image"], child(path, "image"));
  if (j.contains("detections")) {
    const std::string dp = child(path, "detections");
    const json& dets = as_array(j["detections"], dp);
    std::vector<Detection2D> out;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      out.push_back(detection_from_json(dets[i], child(dp, i), v.camera));
    }
    v.detections = std::move(out);
  }
  if (j.contains("depth")) v.depth = depth_from_json(j["depth"], child(path, "depth"));
  v.extra = extras(j, {"camera", "image", "detections", "depth"});
  return v;
}

json view_to_json(const ViewDoc& v) {
  json known = {{"camera", v.camera}};
  if (v.image) known["image"] = *v.image;
  if (v.detections) {
    json dets = json::array();
    for (const auto& d : *v.detections) dets.push_back(detection_to_json(d));
    known["detections"] = dets;
  }
  if (v.depth) known["depth"] = depth_to_json(*v.depth);
  return with_extras(v.extra, known);
}

LabelDoc label_from_json(const json& j, const std::string& path) {
  LabelDoc l;
  const std::string jp = child(path, "joints");
  const json& joints = as_array(require(j, "joints", path), jp);
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (joints[i].is_null()) {
      l.joints.emplace_back(std::nullopt);
    } else {
      l.joints.emplace_back(as_point(joints[i], child(jp, i)));
    }
  }
  l.extra = extras(j, {"joints"});
  return l;
}

json label_to_json(const LabelDoc& l) {
  json joints = json::array();
  for (const auto& p : l.joints) joints.push_back(p ? point_json(*p) : json(nullptr));
  return with_extras(l.extra, {{"joints", joints}});
}

FrameDoc frame_from_json(const json& j, const std::string& path) {
  FrameDoc f;
  f.id = as_string(require(j, "id", path), child(path, "id"));
  f.timestamp = as_number(require(j, "timestamp", path), child(path, "timestamp"));
  if (j.contains("views")) {
    const std::string vp = child(path, "views");
    const json& views = as_array(j["views"], vp);
    for (std::size_t i = 0; i < views.size(); ++i) {
      f.views.push_back(view_from_json(views[i], child(vp, i)));
    }
  }
  if (j.contains("labels")) {
    const std::string lp = child(path, "labels");
    const json& labels = as_array(j["labels"], lp);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      f.labels.push_back(label_from_json(labels[i], child(lp, i)));
    }
  }
  f.extra = extras(j, {"id", "timestamp", "views", "labels"});
  return f;
}

json frame_to_json(const FrameDoc& f) {
  json views = json::array();
  for (const auto& v : f.views) views.push_back(view_to_json(v));
  json labels = json::array();
  for (const auto& l : f.labels) labels.push_back(label_to_json(l));
  return with_extras(f.extra, {{"id", f.id}, {"timestamp", f.timestamp}, {"views", views},
                               {"labels", labels}});
}

json pose_to_json(const Pose3D& pose) {
  json joints = json::array();
  for (const auto& j : pose.joints) {
    joints.push_back(j ? json::array({j->position.x(), j->position.y(), j->position.z(), j->score})
                       : json(nullptr));
  }
  return {{"score", pose.score}, {"center", point_json(pose.center)}, {"joints", joints}};
}

Pose3D pose_from_json(const json& j, const std::string& path) {
  Pose3D pose;
  pose.score = as_number(require(j, "score", path), child(path, "score"));
  if (j.contains("center")) pose.center = as_point(j["center"], child(path, "center"));
  const std::string jp = child(path, "joints");
  const json& joints = as_array(require(j, "joints", path), jp);
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (joints[i].is_null()) {
      pose.joints.emplace_back(std::nullopt);
      continue;
    }
    const std::string p = child(jp, i);
    as_array(joints[i], p, 4);
    JointEstimate e;
    e.position = {as_number(joints[i][0], child(p, 0)), as_number(joints[i][1], child(p, 1)),
                  as_number(joints[i][2], child(p, 2))};
    e.score = as_number(joints[i][3], child(p, 3));
    pose.joints.emplace_back(e);
  }
  return pose;
}

}  // namespace

const CameraDoc* DatasetDoc::find_camera(const std::string& id) const {
  const auto it = std::find_if(cameras.begin(), cameras.end(),
                               [&](const CameraDoc& c) { return c.calib.camera_id == id; });
  return it == cameras.end() ? nullptr : &*it;
}

std::vector<CameraCalib> DatasetDoc::calibs() const {
  std::vector<CameraCalib> out;
  for (const auto& c : cameras) out.push_back(c.calib);
  return out;
}

bool DatasetDoc::operator==(const DatasetDoc& o) const {
  return name == o.name && skeleton == o.skeleton && room.min == o.room.min &&
         room.max == o.room.max && cameras == o.cameras && frames == o.frames &&
         depth_stream == o.depth_stream && extra == o.extra;
}

void validate_dataset(const DatasetDoc& doc) {
  SkeletonDef skel;
  try {
    skel = skeleton_by_name(doc.skeleton);
  } catch (const std::invalid_argument& e) {
    throw DataError("/skeleton", e.what());
  }
  if (!doc.room.valid()) throw DataError("/room", "max must exceed min componentwise");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < doc.cameras.size(); ++i) {
    const std::string path = child("/cameras", i);
    if (!ids.insert(doc.cameras[i].calib.camera_id).second) {
      throw DataError(path, "duplicate camera id '" + doc.cameras[i].calib.camera_id + "'");
    }
    try {
      doc.cameras[i].calib.validate();
    } catch (const std::invalid_argument& e) {
      throw DataError(path, e.what());
    }
  }

  for (std::size_t fi = 0; fi < doc.frames.size(); ++fi) {
    const FrameDoc& f = doc.frames[fi];
    const std::string fpath = child("/frames", fi);
    if (fi > 0 && f.timestamp < doc.frames[fi - 1].timestamp) {
      throw DataError(child(fpath, "timestamp"), "timestamps must be nondecreasing");
    }
    std::set<int> persons;
    std::set<std::string> seen_cameras;
    for (std::size_t vi = 0; vi < f.views.size(); ++vi) {
      const ViewDoc& v = f.views[vi];
      const std::string vpath = child(child(fpath, "views"), vi);
      const CameraDoc* cam = doc.find_camera(v.camera);
      if (cam == nullptr) {
        throw DataError(child(vpath, "camera"),
                        "frame '" + f.id + "' references unknown camera '" + v.camera + "'");
      }
      if (!seen_cameras.insert(v.camera).second) {
        throw DataError(vpath, "frame '" + f.id + "' lists camera '" + v.camera + "' twice");
      }
      if (!v.detections) continue;
      const ImageSize size{cam->calib.width, cam->calib.height};
      for (std::size_t di = 0; di < v.detections->size(); ++di) {
        const Detection2D& d = (*v.detections)[di];
        const std::string dpath = child(child(vpath, "detections"), di);
        if (d.person_id <= 0) throw DataError(child(dpath, "person"), "person ids must be positive");
        if (!persons.insert(d.person_id).second) {
          throw DataError(child(dpath, "person"), "person id " + std::to_string(d.person_id) +
                                                      " repeats within frame '" + f.id + "'");
        }
        if (static_cast<int>(d.keypoints.size()) != skel.joint_count()) {
          throw DataError(child(dpath, "keypoints"),
                          "expected " + std::to_string(skel.joint_count()) + " keypoints");
        }
        for (std::size_t k = 0; k < d.keypoints.size(); ++k) {
          const Keypoint2D& kp = d.keypoints[k];
          if (!kp.visible) continue;
          const std::string kpath = child(child(dpath, "keypoints"), k);
          if (kp.confidence < 0.0 || kp.confidence > 1.0) {
            throw DataError(kpath, "confidence outside [0, 1]");
          }
          if (!within_extended_bounds(kp, size)) {
            throw DataError(kpath, "keypoint outside the extended image bounds");
          }
        }
      }
    }
    for (std::size_t li = 0; li < f.labels.size(); ++li) {
      if (static_cast<int>(f.labels[li].joints.size()) != skel.joint_count()) {
        throw DataError(child(child(child(fpath, "labels"), li), "joints"),
                        "expected " + std::to_string(skel.joint_count()) + " joints");
      }
    }
  }
  for (std::size_t i = 0; i < doc.depth_stream.size(); ++i) {
    if (doc.find_camera(doc.depth_stream[i].camera) == nullptr) {
      throw DataError(child(child("/depth_stream", i), "camera"),
                      "unknown camera '" + doc.depth_stream[i].camera + "'");
    }
  }
}

DatasetDoc dataset_from_json(const json& j) {
  const std::string root;
  const int schema = as_int(require(j, "schema", root), "/schema");
  if (schema != kSchemaVersion) {
    throw DataError("/schema", "unsupported schema version " + std::to_string(schema));
  }
  DatasetDoc doc;
  doc.name = as_string(require(j, "name", root), "/name");
  doc.skeleton = as_string(require(j, "skeleton", root), "/skeleton");
  const json& room = require(j, "room", root);
  doc.room.min = as_point(require(room, "min", "/room"), "/room/min");
  doc.room.max = as_point(require(room, "max", "/room"), "/room/max");

  const json& cams = as_array(require(j, "cameras", root), "/cameras");
  for (std::size_t i = 0; i < cams.size(); ++i) {
    doc.cameras.push_back(camera_from_json(cams[i], child("/cameras", i)));
  }
  const json& frames = as_array(require(j, "frames", root), "/frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    doc.frames.push_back(frame_from_json(frames[i], child("/frames", i)));
  }
  if (j.contains("depth_stream")) {
    const json& stream = as_array(j["depth_stream"], "/depth_stream");
    for (std::size_t i = 0; i < stream.size(); ++i) {
      const std::string p = child("/depth_stream", i);
      DepthCapture cap;
      cap.camera = as_string(require(stream[i], "camera", p), child(p, "camera"));
      cap.timestamp = as_number(require(stream[i], "timestamp", p), child(p, "timestamp"));
      cap.depth = depth_from_json(require(stream[i], "depth", p), child(p, "depth"));
      doc.depth_stream.push_back(std::move(cap));
    }
  }
  doc.extra = extras(j, {"schema", "name", "skeleton", "room", "cameras", "frames", "depth_stream"});
  validate_dataset(doc);
  return doc;
}

json dataset_to_json(const DatasetDoc& doc) {
  json cams = json::array();
  for (const auto& c : doc.cameras) cams.push_back(camera_to_json(c));
  json frames = json::array();
  for (const auto& f : doc.frames) frames.push_back(frame_to_json(f));
  json known = {{"schema", kSchemaVersion},
                {"name", doc.name},
                {"skeleton", doc.skeleton},
                {"room", {{"min", point_json(doc.room.min)}, {"max", point_json(doc.room.max)}}},
                {"cameras", cams},
                {"frames", frames}};
  if (!doc.depth_stream.empty()) {
    json stream = json::array();
    for (const auto& c : doc.depth_stream) {
      stream.push_back({{"camera", c.camera}, {"timestamp", c.timestamp}, {"depth", depth_to_json(c.depth)}});
    }
    known["depth_stream"] = stream;
  }
  return with_extras(doc.extra, known);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string(), std::string("invalid JSON: ") + e.what());
  }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path.string(), "cannot write file");
  out << j.dump(1) << '\n';
}

DatasetDoc read_dataset(const std::filesystem::path& path) {
  return dataset_from_json(read_json_file(path));
}

void write_dataset(const DatasetDoc& doc, const std::filesystem::path& path) {
  write_json_file(dataset_to_json(doc), path);
}

DatasetDoc merge_datasets(std::span<const DatasetDoc> docs) {
  if (docs.empty()) throw DataError("/", "merge_datasets needs at least one dataset");
  if (docs.size() == 1) return docs.front();

  DatasetDoc out;
  out.skeleton = docs.front().skeleton;
  out.room = docs.front().room;
  std::set<std::string> prefixes;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const DatasetDoc& d = docs[i];
    if (d.skeleton != out.skeleton) {
      throw DataError(child("/datasets", i), "skeleton '" + d.skeleton + "' differs from '" +
                                                 out.skeleton + "'");
    }
    std::string prefix = d.name.empty() ? "d" + std::to_string(i) : d.name;
    if (!prefixes.insert(prefix).second) {
      prefix += "#" + std::to_string(i);
      prefixes.insert(prefix);
    }
    prefix += "/";
    out.name += (i > 0 ? "+" : "") + d.name;
    out.room.min = out.room.min.cwiseMin(d.room.min);
    out.room.max = out.room.max.cwiseMax(d.room.max);
    for (CameraDoc cam : d.cameras) {
      cam.calib.camera_id = prefix + cam.calib.camera_id;
      out.cameras.push_back(std::move(cam));
    }
    for (FrameDoc f : d.frames) {
      f.id = prefix + f.id;
      for (auto& v : f.views) {
        v.camera = prefix + v.camera;
        if (v.detections) {
          for (auto& det : *v.detections) det.view_id = v.camera;
        }
      }
      out.frames.push_back(std::move(f));
    }
    for (DepthCapture c : d.depth_stream) {
      c.camera = prefix + c.camera;
      out.depth_stream.push_back(std::move(c));
    }
  }
  std::stable_sort(out.frames.begin(), out.frames.end(),
                   [](const FrameDoc& a, const FrameDoc& b) { return a.timestamp < b.timestamp; });
  std::stable_sort(out.depth_stream.begin(), out.depth_stream.end(),
                   [](const DepthCapture& a, const DepthCapture& b) { return a.timestamp < b.timestamp; });
  return out;
}

std::vector<FrameDoc> pair_depth(std::vector<FrameDoc> frames,
                                 std::span<const DepthCapture> captures, double max_dt_s) {
  if (!(max_dt_s > 0.0)) throw std::invalid_argument("pair_depth: max_dt must be positive");
  std::map<std::string, std::vector<const DepthCapture*>> by_camera;
  for (const auto& c : captures) by_camera[c.camera].push_back(&c);

  for (FrameDoc& f : frames) {
    for (const auto& [camera, caps] : by_camera) {
      const DepthCapture* best = nullptr;
      double best_dt = 0.0;
      for (const DepthCapture* c : caps) {
        const double dt = std::abs(c->timestamp - f.timestamp);
        if (dt > max_dt_s) continue;
        if (best == nullptr || dt < best_dt || (dt == best_dt && c->timestamp < best->timestamp)) {
          best = c;
          best_dt = dt;
        }
      }
      auto view = std::find_if(f.views.begin(), f.views.end(),
                               [&](const ViewDoc& v) { return v.camera == camera; });
      if (best == nullptr) {
        if (view != f.views.end()) view->depth.reset();
        continue;
      }
      if (view == f.views.end()) {
        ViewDoc added;
        added.camera = camera;
        f.views.push_back(std::move(added));
        view = std::prev(f.views.end());
      }
      view->depth = best->depth;
    }
  }
  return frames;
}

DepthFrame load_depth(const std::string& camera, const DepthRef& ref,
                      const std::filesystem::path& base_dir) {
  DepthFrame frame;
  frame.view_id = camera;
  if (ref.points) frame.points = *ref.points;
  if (ref.image) {
    const auto path = base_dir / *ref.image;
    GrayImage<std::uint16_t> png;
    try {
      png = read_png16(path);
    } catch (const std::runtime_error& e) {
      throw DataError(path.string(), e.what());
    }
    frame.image = DepthImage{png.width, png.height, std::move(png.pixels)};
  }
  return frame;
}

std::vector<ViewInput> frame_views(const DatasetDoc& doc, const FrameDoc& frame) {
  std::vector<ViewInput> views;
  for (const ViewDoc& v : frame.views) {
    if (!v.detections) continue;
    const CameraDoc* cam = doc.find_camera(v.camera);
    if (cam == nullptr) throw DataError("/frames/" + frame.id, "unknown camera '" + v.camera + "'");
    if (cam->depth_only) continue;
    views.push_back({cam->calib, *v.detections});
  }
  if (views.size() < 2) {
    throw DataError("/frames/" + frame.id,
                    "frame '" + frame.id + "' has detections for fewer than two views");
  }
  return views;
}

json predictions_to_json(const PredictionsDoc& doc) {
  json frames = json::array();
  for (const auto& f : doc.frames) {
    json persons = json::array();
    for (const auto& p : f.poses) persons.push_back(pose_to_json(p));
    frames.push_back({{"frame", f.frame_id}, {"persons", persons}});
  }
  return {{"schema", kSchemaVersion},
          {"skeleton", doc.skeleton},
          {"config", doc.config},
          {"frames", frames}};
}

PredictionsDoc predictions_from_json(const json& j) {
  const int schema = as_int(require(j, "schema", ""), "/schema");
  if (schema != kSchemaVersion) throw DataError("/schema", "unsupported schema version");
  PredictionsDoc doc;
  doc.skeleton = as_string(require(j, "skeleton", ""), "/skeleton");
  if (j.contains("config")) doc.config = j["config"];
  const json& frames = as_array(require(j, "frames", ""), "/frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string fp = child("/frames", i);
    FramePrediction f;
    f.frame_id = as_string(require(frames[i], "frame", fp), child(fp, "frame"));
    const std::string pp = child(fp, "persons");
    const json& persons = as_array(require(frames[i], "persons", fp), pp);
    for (std::size_t k = 0; k < persons.size(); ++k) {
      f.poses.push_back(pose_from_json(persons[k], child(pp, k)));
    }
    doc.frames.push_back(std::move(f));
  }
  return doc;
}

PredictionsDoc read_predictions(const std::filesystem::path& path) {
  return predictions_from_json(read_json_file(path));
}

void write_predictions(const PredictionsDoc& doc, const std::filesystem::path& path) {
  write_json_file(predictions_to_json(doc), path);
}

}  // namespace vkf
