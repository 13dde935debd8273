#include "vkf/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>

namespace vkf {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kMaxLimbMm = 580.0;
constexpr double kMinSeparationMm = 400.0;

// Body of one person in a local frame: facing +y, z up, left side at -x.
struct BodyParams {
  double scale = 1.0;
  double arm_abduction[2], arm_flexion[2], elbow_bend[2];
  double leg_abduction[2], leg_flexion[2], knee_bend[2];
  double finger_curl[2][5];
};

BodyParams random_params(Rng& rng) {
  BodyParams p;
  p.scale = rng.uniform(0.9, 1.1);
  for (int s = 0; s < 2; ++s) {
    p.arm_abduction[s] = rng.uniform(5.0, 70.0) * kDeg;
    p.arm_flexion[s] = rng.uniform(-30.0, 60.0) * kDeg;
    p.elbow_bend[s] = rng.uniform(0.0, 110.0) * kDeg;
    p.leg_abduction[s] = rng.uniform(0.0, 12.0) * kDeg;
    p.leg_flexion[s] = rng.uniform(-20.0, 35.0) * kDeg;
    p.knee_bend[s] = rng.uniform(0.0, 50.0) * kDeg;
    for (double& c : p.finger_curl[s]) c = rng.uniform(0.0, 0.6);
  }
  return p;
}

Eigen::Vector3d bend_toward(const Eigen::Vector3d& d, const Eigen::Vector3d& toward, double angle) {
  Eigen::Vector3d perp = toward - toward.dot(d) * d;
  if (perp.norm() < 1e-9) return d;
  perp.normalize();
  return (std::cos(angle) * d + std::sin(angle) * perp).normalized();
}

using JointMap = std::map<std::string, Point3>;

void add_limbs(JointMap& m, const BodyParams& p) {
  const double s = p.scale;
  const double hip_h = 950.0 * s;
  const double sh_h = hip_h + 500.0 * s;
  const Eigen::Vector3d forward = Eigen::Vector3d::UnitY();
  const char* sides[2] = {"left", "right"};
  for (int i = 0; i < 2; ++i) {
    const double side = i == 0 ? -1.0 : 1.0;
    const std::string n = sides[i];
    m[n + "_hip"] = {side * 120.0 * s, 0.0, hip_h};
    m[n + "_shoulder"] = {side * 190.0 * s, 0.0, sh_h};
    m[n + "_eye"] = {side * 35.0 * s, 75.0 * s, sh_h + 255.0 * s};
    m[n + "_ear"] = {side * 75.0 * s, 0.0, sh_h + 235.0 * s};

    const double a = p.arm_abduction[i], f = p.arm_flexion[i];
    const Eigen::Vector3d upper =
        Eigen::Vector3d(side * std::sin(a), std::sin(f) * std::cos(a), -std::cos(f) * std::cos(a))
            .normalized();
    m[n + "_elbow"] = m[n + "_shoulder"] + 290.0 * s * upper;
    const Eigen::Vector3d fore = bend_toward(upper, forward, p.elbow_bend[i]);
    m[n + "_wrist"] = m[n + "_elbow"] + 260.0 * s * fore;

    const double la = p.leg_abduction[i], lf = p.leg_flexion[i];
    const Eigen::Vector3d thigh =
        Eigen::Vector3d(side * std::sin(la), std::sin(lf) * std::cos(la), -std::cos(lf) * std::cos(la))
            .normalized();
    m[n + "_knee"] = m[n + "_hip"] + 430.0 * s * thigh;
    const Eigen::Vector3d shin = bend_toward(thigh, -forward, p.knee_bend[i]);
    m[n + "_ankle"] = m[n + "_knee"] + 420.0 * s * shin;
  }
  m["nose"] = {0.0, 90.0 * s, sh_h + 220.0 * s};
}

void add_feet(JointMap& m, double s) {
  const char* sides[2] = {"left", "right"};
  for (int i = 0; i < 2; ++i) {
    const double side = i == 0 ? -1.0 : 1.0;
    const std::string n = sides[i];
    const Point3 ankle = m[n + "_ankle"];
    m[n + "_big_toe"] = ankle + s * Eigen::Vector3d(side * 20.0, 170.0, -60.0);
    m[n + "_small_toe"] = ankle + s * Eigen::Vector3d(side * 60.0, 150.0, -60.0);
    m[n + "_heel"] = ankle + s * Eigen::Vector3d(0.0, -50.0, -70.0);
  }
}

// 68 face landmarks around the nose: jaw, brows, nose, eyes, mouth.
void add_face(JointMap& m, double s) {
  const Point3 nose = m["nose"];
  std::vector<Eigen::Vector3d> pts;
  for (int k = 0; k < 17; ++k) {
    const double phi = (-90.0 + 180.0 * k / 16.0) * kDeg;
    pts.emplace_back(70.0 * std::sin(phi), -60.0 + 45.0 * std::cos(phi), -10.0 - 63.0 * std::cos(phi));
  }
  for (int k = 0; k < 10; ++k) {
    const double x = -55.0 + 110.0 * k / 9.0;
    pts.emplace_back(x, -20.0, 45.0);
  }
  for (int k = 0; k < 4; ++k) pts.emplace_back(0.0, -25.0 + 6.0 * k, 40.0 - 10.0 * k);
  for (int k = 0; k < 5; ++k) pts.emplace_back(-18.0 + 9.0 * k, -10.0, -8.0);
  for (double cx : {-32.0, 32.0}) {
    for (int k = 0; k < 6; ++k) {
      const double t = 2.0 * std::numbers::pi * k / 6.0;
      pts.emplace_back(cx + 14.0 * std::cos(t), -20.0, 28.0 + 5.0 * std::sin(t));
    }
  }
  for (int k = 0; k < 12; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 12.0;
    pts.emplace_back(24.0 * std::cos(t), -10.0, -35.0 + 10.0 * std::sin(t));
  }
  for (int k = 0; k < 8; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 8.0;
    pts.emplace_back(14.0 * std::cos(t), -12.0, -35.0 + 4.0 * std::sin(t));
  }
  for (int k = 0; k < 68; ++k) m["face_" + std::to_string(k)] = nose + s * pts[k];
}

void add_hands(JointMap& m, const BodyParams& p) {
  const double s = p.scale;
  const char* sides[2] = {"left", "right"};
  for (int i = 0; i < 2; ++i) {
    const std::string n = sides[i];
    const Point3 root = m[n + "_wrist"];
    const Eigen::Vector3d d = (root - m[n + "_elbow"]).normalized();
    Eigen::Vector3d w = d.cross(Eigen::Vector3d::UnitZ());
    if (w.norm() < 1e-6) w = Eigen::Vector3d::UnitX();
    w.normalize();
    const Eigen::Vector3d normal = d.cross(w);
    m[n + "_hand_root"] = root;
    for (int finger = 0; finger < 5; ++finger) {
      const double curl = p.finger_curl[i][finger];
      Point3 joint;
      Eigen::Vector3d dir;
      double lengths[3];
      if (finger == 0) {
        joint = root + s * (25.0 * d - 25.0 * w);
        dir = (d - 0.6 * w).normalized();
        lengths[0] = 30.0;
        lengths[1] = 25.0;
        lengths[2] = 20.0;
      } else {
        joint = root + s * (85.0 * d + (finger - 2.5) * 20.0 * w);
        dir = d;
        lengths[0] = 40.0;
        lengths[1] = 25.0;
        lengths[2] = 20.0;
      }
      const int base = 1 + finger * 4;
      m[n + "_hand_" + std::to_string(base)] = joint;
      for (int k = 0; k < 3; ++k) {
        dir = (dir + curl * normal).normalized();
        joint += s * lengths[k] * dir;
        m[n + "_hand_" + std::to_string(base + 1 + k)] = joint;
      }
    }
  }
}

// Pulls children toward their parents so no limb exceeds kMaxLimbMm.
void clamp_limbs(std::vector<Point3>& joints, const SkeletonDef& skel) {
  for (const auto& [parent, child] : skel.limb_chains) {
    const Eigen::Vector3d d = joints[child] - joints[parent];
    if (d.norm() > kMaxLimbMm) joints[child] = joints[parent] + d.normalized() * kMaxLimbMm;
  }
}

GtPerson build_person(const SkeletonDef& skel, const BodyParams& p, double yaw,
                      const Eigen::Vector2d& position, double pose_noise_mm, Rng& rng) {
  JointMap m;
  add_limbs(m, p);

  // Noise on body joints only; face, hands and feet follow the noisy body.
  if (pose_noise_mm > 0.0) {
    const SkeletonDef body = coco17();
    std::vector<Point3> body_joints;
    for (const auto& n : body.joint_names) {
      body_joints.push_back(m[n] + pose_noise_mm * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()));
    }
    clamp_limbs(body_joints, body);
    for (JointId j = 0; j < body.joint_count(); ++j) m[body.joint_names[j]] = body_joints[j];
  }
  add_feet(m, p.scale);
  add_face(m, p.scale);
  add_hands(m, p);

  double floor_z = std::numeric_limits<double>::infinity();
  for (const char* n : {"left_ankle", "right_ankle", "left_big_toe", "right_big_toe",
                        "left_small_toe", "right_small_toe", "left_heel", "right_heel"}) {
    floor_z = std::min(floor_z, m[n].z());
  }
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Vector3d offset(position.x(), position.y(), 10.0 - floor_z);

  GtPerson person;
  person.reserve(skel.joint_count());
  for (const auto& n : skel.joint_names) {
    const auto it = m.find(n);
    if (it == m.end()) throw std::logic_error("synthetic body has no joint '" + n + "'");
    person.push_back(rot * it->second + offset);
  }
  return person;
}

// Smallest focal length (over the box corners) keeping the box in the image.
double fit_focal(const Point3& eye, const Point3& target, const RoomBounds& box, int width,
                 int height) {
  const CameraCalib probe = look_at_camera("probe", eye, target, 1.0, width, height);
  double focal = std::numeric_limits<double>::infinity();
  for (int c = 0; c < 8; ++c) {
    const Point3 corner((c & 1) ? box.max.x() : box.min.x(), (c & 2) ? box.max.y() : box.min.y(),
                        (c & 4) ? box.max.z() : box.min.z());
    const Eigen::Vector3d cam = probe.R * corner + probe.t;
    if (cam.z() <= 1.0) continue;
    const double ax = std::abs(cam.x() / cam.z());
    const double ay = std::abs(cam.y() / cam.z());
    if (ax > 1e-9) focal = std::min(focal, 0.46 * width / ax);
    if (ay > 1e-9) focal = std::min(focal, 0.46 * height / ay);
  }
  return std::isfinite(focal) ? focal : 0.5 * width;
}

}  // namespace

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RigStyle rig_style_from_string(const std::string& name) {
  if (name == "ring") return RigStyle::Ring;
  if (name == "corners") return RigStyle::Corners;
  throw std::invalid_argument("unknown rig style '" + name + "' (ring|corners)");
}

std::vector<CameraCalib> make_rig(int n_cameras, const RoomBounds& room, RigStyle style,
                                  std::uint64_t seed, const RigOptions& options) {
  if (n_cameras < 2) throw std::invalid_argument("make_rig: at least two cameras required");
  if (!room.valid()) throw std::invalid_argument("make_rig: invalid room bounds");
  Rng rng(mix_seed(seed, 0x716));
  const Point3 center = 0.5 * (room.min + room.max);
  const Eigen::Vector3d half = 0.5 * (room.max - room.min);
  const Point3 target(center.x(), center.y(), room.min.z() + std::min(900.0, half.z()));

  RoomBounds active = room;
  const double margin = std::min({600.0, 0.4 * half.x(), 0.4 * half.y()});
  active.min += Eigen::Vector3d(margin, margin, 0.0);
  active.max -= Eigen::Vector3d(margin, margin, 0.0);
  active.max.z() = std::min(active.max.z(), room.min.z() + 2000.0);

  std::vector<double> azimuths;
  if (style == RigStyle::Corners) {
    for (int k = 0; k < n_cameras; ++k) {
      const int ring = k / 4;
      const double base = ring % 2 == 0 ? 45.0 : 0.0;
      azimuths.push_back((base + 90.0 * (k % 4) + 22.5 * (ring / 2)) * kDeg);
    }
  } else {
    const double phase = rng.uniform(0.0, 360.0 / n_cameras);
    for (int k = 0; k < n_cameras; ++k) azimuths.push_back((phase + 360.0 * k / n_cameras) * kDeg);
  }

  std::vector<CameraCalib> rig;
  for (int k = 0; k < n_cameras; ++k) {
    const double az = azimuths[k] + rng.uniform(-3.0, 3.0) * kDeg;
    const Eigen::Vector2d dir(std::cos(az), std::sin(az));
    // Distance to the wall along this direction plus the standoff.
    const double to_wall = std::min(std::abs(dir.x()) > 1e-9 ? half.x() / std::abs(dir.x()) : 1e12,
                                    std::abs(dir.y()) > 1e-9 ? half.y() / std::abs(dir.y()) : 1e12);
    const double radius = to_wall + options.standoff_mm;
    const double height = room.min.z() + (k % 2 == 0 ? 2300.0 : 1800.0) + rng.uniform(-100.0, 100.0);
    const Point3 eye(center.x() + radius * dir.x(), center.y() + radius * dir.y(), height);
    const double focal = fit_focal(eye, target, active, options.width, options.height);
    rig.push_back(look_at_camera(options.id_prefix + std::to_string(k), eye, target, focal,
                                 options.width, options.height));
  }
  return rig;
}

std::vector<GtPerson> make_scene(int n_persons, const SkeletonDef& skel, const RoomBounds& room,
                                 std::uint64_t seed, const SceneOptions& options) {
  if (n_persons < 0) throw std::invalid_argument("make_scene: negative person count");
  if (options.min_separation_mm < kMinSeparationMm) {
    throw std::invalid_argument("make_scene: person separation must be at least 400 mm");
  }
  Rng rng(mix_seed(seed, 0x5CE));
  const double margin = options.wall_margin_mm;
  const Eigen::Vector2d lo(room.min.x() + margin, room.min.y() + margin);
  const Eigen::Vector2d hi(room.max.x() - margin, room.max.y() - margin);
  if ((hi.array() <= lo.array()).any() && n_persons > 0) {
    throw std::invalid_argument("make_scene: room too small for the wall margin");
  }

  std::vector<GtPerson> persons;
  std::vector<Eigen::Vector2d> placed;
  constexpr int kAttempts = 1000;
  for (int i = 0; i < n_persons; ++i) {
    bool ok = false;
    Eigen::Vector2d pos;
    for (int attempt = 0; attempt < kAttempts && !ok; ++attempt) {
      pos = {rng.uniform(lo.x(), hi.x()), rng.uniform(lo.y(), hi.y())};
      ok = std::all_of(placed.begin(), placed.end(), [&](const Eigen::Vector2d& q) {
        return (q - pos).norm() >= options.min_separation_mm;
      });
    }
    if (!ok) throw std::invalid_argument("make_scene: cannot place " + std::to_string(n_persons) + " persons");
    placed.push_back(pos);
    const BodyParams params = random_params(rng);
    const double yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);
    persons.push_back(build_person(skel, params, yaw, pos, options.pose_noise_mm, rng));
  }
  return persons;
}

std::vector<std::vector<Detection2D>> render_detections(
    const std::vector<GtPerson>& scene, const std::vector<CameraCalib>& rig, double jitter_px,
    double dropout_prob, std::uint64_t seed, const std::vector<std::vector<bool>>& visible) {
  if (!visible.empty() && (visible.size() != rig.size() ||
                           std::any_of(visible.begin(), visible.end(), [&](const auto& row) {
                             return row.size() != scene.size();
                           }))) {
    throw std::invalid_argument("render_detections: visibility table does not match scene");
  }
  if (dropout_prob < 0.0 || dropout_prob > 1.0 || jitter_px < 0.0) {
    throw std::invalid_argument("render_detections: dropout in [0, 1] and jitter >= 0 required");
  }
  Rng rng(mix_seed(seed, 0xD37));
  const double sigma = jitter_px * std::sqrt(2.0 / std::numbers::pi);
  std::vector<std::vector<Detection2D>> out(rig.size());
  for (std::size_t v = 0; v < rig.size(); ++v) {
    for (std::size_t p = 0; p < scene.size(); ++p) {
      const GtPerson& person = scene[p];
      const bool shown = visible.empty() || visible[v][p];
      Detection2D det;
      det.view_id = rig[v].camera_id;
      bool any = false;
      for (const Point3& joint : person) {
        Keypoint2D kp;
        const auto px = project(rig[v], joint);
        const double du = rng.normal() * sigma;
        const double dv = rng.normal() * sigma;
        const bool dropped = rng.bernoulli(dropout_prob);
        if (px) {
          const Pixel2 q = jitter_px > 0.0 ? Pixel2(px->x() + du, px->y() + dv) : *px;
          if (shown && rig[v].in_image(q) && !dropped) {
            kp = {q.x(), q.y(), 1.0, true};
            any = true;
          }
        }
        det.keypoints.push_back(kp);
      }
      if (any) out[v].push_back(std::move(det));
    }
  }
  // Frame-unique ids in shuffled order, so ids carry no correspondence.
  std::vector<Detection2D*> all;
  for (auto& view : out) {
    for (auto& d : view) all.push_back(&d);
  }
  std::vector<int> ids(all.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i) + 1;
  for (std::size_t i = ids.size(); i > 1; --i) {
    std::swap(ids[i - 1], ids[static_cast<std::size_t>(rng.next() % i)]);
  }
  for (std::size_t i = 0; i < all.size(); ++i) all[i]->person_id = ids[i];
  return out;
}

std::vector<DepthFrame> render_depth(const std::vector<GtPerson>& scene, const SkeletonDef& skel,
                                     const std::vector<CameraCalib>& depth_rig,
                                     int points_per_joint, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xDE9));
  std::vector<Point3> cloud;
  auto in_ball = [&](double radius) {
    Eigen::Vector3d d;
    do {
      d = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    } while (d.squaredNorm() > 1.0);
    return Eigen::Vector3d(radius * d);
  };

  std::vector<std::pair<JointId, JointId>> segments = skel.limb_chains;
  const JointId ls = skel.index_of("left_shoulder"), rs = skel.index_of("right_shoulder");
  const JointId lh = skel.index_of("left_hip"), rh = skel.index_of("right_hip");
  segments.insert(segments.end(), {{ls, rs}, {lh, rh}, {ls, lh}, {rs, rh}, {ls, rh}, {rs, lh}});

  const int half = points_per_joint / 2;
  for (const GtPerson& person : scene) {
    for (const Point3& joint : person) {
      for (int k = 0; k < half; ++k) cloud.push_back(joint + in_ball(kDepthCapsuleRadiusMm));
    }
    const int per_segment =
        segments.empty() ? 0
                         : (points_per_joint - half) * skel.joint_count() /
                               static_cast<int>(segments.size());
    for (const auto& [a, b] : segments) {
      for (int k = 0; k < per_segment; ++k) {
        const double t = rng.uniform();
        cloud.push_back(person[a] + t * (person[b] - person[a]) + in_ball(kDepthCapsuleRadiusMm));
      }
    }
  }

  std::vector<DepthFrame> frames;
  for (const CameraCalib& cam : depth_rig) {
    DepthFrame f;
    f.view_id = cam.camera_id;
    for (const Point3& p : cloud) {
      const auto px = project(cam, p);
      if (px && cam.in_image(*px)) f.points.push_back(p);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

GhostScenario make_ghost_scenario(const SkeletonDef& skel, std::uint64_t seed) {
  GhostScenario g;
  g.room = {Point3(-2500.0, -2000.0, 0.0), Point3(2500.0, 2000.0, 2200.0)};
  const Point3 target(0.0, 0.0, 900.0);
  constexpr int kWidth = 1000, kHeight = 1000;
  RoomBounds active{Point3(-1800.0, -1200.0, 0.0), Point3(1800.0, 1200.0, 2000.0)};

  // A and B share y and z, so their baseline runs along x.
  const std::vector<Point3> eyes = {{-3500.0, -2600.0, 2000.0}, {3500.0, -2600.0, 2000.0},
                                    {-3000.0, 3000.0, 2300.0},  {3200.0, 2900.0, 1800.0}};
  for (std::size_t k = 0; k < eyes.size(); ++k) {
    g.rig.push_back(look_at_camera("cam" + std::to_string(k), eyes[k], target,
                                   fit_focal(eyes[k], target, active, kWidth, kHeight), kWidth,
                                   kHeight));
  }
  const std::vector<Point3> depth_eyes = {{0.0, 3400.0, 2600.0}, {0.0, -3400.0, 2600.0}};
  for (std::size_t k = 0; k < depth_eyes.size(); ++k) {
    g.depth_rig.push_back(look_at_camera("depth" + std::to_string(k), depth_eyes[k], target,
                                         fit_focal(depth_eyes[k], target, active, 640, 480), 640, 480));
  }

  Rng rng(mix_seed(seed, 0x6057));
  const BodyParams params = random_params(rng);
  const double yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const Eigen::Vector2d first(rng.uniform(-900.0, -600.0), rng.uniform(-300.0, 300.0));
  const Eigen::Vector2d second = first + Eigen::Vector2d(rng.uniform(1200.0, 1600.0), 0.0);
  Rng unused(0);
  g.persons.push_back(build_person(skel, params, yaw, first, 0.0, unused));
  g.persons.push_back(build_person(skel, params, yaw, second, 0.0, unused));
  g.visible.assign(g.rig.size(), {true, false});
  g.visible[1][1] = true;
  return g;
}

DatasetDoc make_dataset(const SynthConfig& cfg) {
  const SkeletonDef skel = skeleton_by_name(cfg.skeleton);
  DatasetDoc doc;
  doc.name = cfg.name;
  doc.skeleton = cfg.skeleton;

  std::vector<CameraCalib> rig;
  std::vector<CameraCalib> depth_rig;
  if (cfg.ghost) {
    const GhostScenario g = make_ghost_scenario(skel, cfg.seed);
    doc.room = g.room;
    rig = g.rig;
    depth_rig = g.depth_rig;
  } else {
    doc.room = cfg.room;
    rig = make_rig(cfg.cameras, cfg.room, cfg.style, cfg.seed);
    if (cfg.depth) {
      RigOptions opts{640, 480, "depth", 1000.0};
      depth_rig = make_rig(std::max(2, cfg.depth_cameras), cfg.room, RigStyle::Ring,
                           mix_seed(cfg.seed, 0xD), opts);
      depth_rig.resize(cfg.depth_cameras);
    }
  }
  if (!cfg.depth) depth_rig.clear();
  for (const auto& c : rig) doc.cameras.push_back({c, false});
  for (const auto& c : depth_rig) doc.cameras.push_back({c, true});

  for (int f = 0; f < cfg.frames; ++f) {
    const std::uint64_t frame_seed = mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(f));
    std::vector<GtPerson> scene;
    std::vector<std::vector<bool>> visible;
    if (cfg.ghost) {
      GhostScenario g = make_ghost_scenario(skel, frame_seed);
      scene = std::move(g.persons);
      visible = std::move(g.visible);
    } else {
      SceneOptions opts;
      opts.pose_noise_mm = cfg.pose_noise_mm;
      opts.min_separation_mm = cfg.min_separation_mm;
      scene = make_scene(cfg.persons, skel, cfg.room, frame_seed, opts);
    }
    const auto dets = render_detections(scene, rig, cfg.jitter_px, cfg.dropout, frame_seed, visible);

    FrameDoc frame;
    frame.id = "f" + std::to_string(f);
    frame.timestamp = 0.1 * f;
    for (std::size_t v = 0; v < rig.size(); ++v) {
      ViewDoc view;
      view.camera = rig[v].camera_id;
      view.detections = dets[v];
      frame.views.push_back(std::move(view));
    }
    if (!depth_rig.empty()) {
      const auto depth = render_depth(scene, skel, depth_rig, cfg.points_per_joint, frame_seed);
      for (const DepthFrame& d : depth) {
        ViewDoc view;
        view.camera = d.view_id;
        view.depth = DepthRef{std::nullopt, d.points};
        frame.views.push_back(std::move(view));
      }
    }
    for (const GtPerson& p : scene) {
      LabelDoc label;
      for (const Point3& j : p) label.joints.emplace_back(j);
      frame.labels.push_back(std::move(label));
    }
    doc.frames.push_back(std::move(frame));
  }
  validate_dataset(doc);
  return doc;
}

}  // namespace vkf
