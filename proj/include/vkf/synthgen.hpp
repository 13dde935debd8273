#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vkf/calib.hpp"
#include "vkf/dataio.hpp"
#include "vkf/depthmask.hpp"
#include "vkf/fusion.hpp"
#include "vkf/heatmap2d.hpp"
#include "vkf/skeleton.hpp"

namespace vkf {

/// Portable random source: std::mt19937_64 (its output sequence is fixed by
/// the C++ standard) with hand-written transforms, since the standard
/// distributions differ between library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (one draw per call).
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a base seed and a salt.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

enum class RigStyle { Ring, Corners };

RigStyle rig_style_from_string(const std::string& name);

struct RigOptions {
  int width = 1000;
  int height = 1000;
  std::string id_prefix = "cam";
  /// Horizontal distance of the cameras outside the room walls.
  double standoff_mm = 1200.0;
};

/// Cameras around the room looking at its center; focal length chosen so
/// the area where persons stand fits the image. Throws std::invalid_argument
/// for fewer than two cameras.
std::vector<CameraCalib> make_rig(int n_cameras, const RoomBounds& room, RigStyle style,
                                  std::uint64_t seed, const RigOptions& options = {});

/// Ground-truth person: one position per skeleton joint.
using GtPerson = std::vector<Point3>;

struct SceneOptions {
  double pose_noise_mm = 0.0;
  double min_separation_mm = 1000.0;
  double wall_margin_mm = 600.0;
};

/// Random standing persons with bounded limb lengths, centers at least
/// min_separation_mm apart (throws std::invalid_argument if they cannot be
/// placed or the separation is below 400 mm).
std::vector<GtPerson> make_scene(int n_persons, const SkeletonDef& skel, const RoomBounds& room,
                                 std::uint64_t seed, const SceneOptions& options = {});

/// Projects every joint into every camera. `jitter_px` is the mean pixel
/// offset magnitude (per-axis sigma jitter_px * sqrt(2 / pi)); each joint is
/// dropped with `dropout_prob`. Joints behind a camera or outside its image
/// are invisible. Person ids are unique across all views of the frame.
/// `visible[c][p]`, when given, hides person p from camera c entirely.
std::vector<std::vector<Detection2D>> render_detections(
    const std::vector<GtPerson>& scene, const std::vector<CameraCalib>& rig, double jitter_px,
    double dropout_prob, std::uint64_t seed, const std::vector<std::vector<bool>>& visible = {});

/// Samples points inside capsules around every skeleton edge (plus the torso
/// diagonals) and spheres around every joint, then keeps per depth camera
/// the points it can see.
std::vector<DepthFrame> render_depth(const std::vector<GtPerson>& scene, const SkeletonDef& skel,
                                     const std::vector<CameraCalib>& depth_rig,
                                     int points_per_joint, std::uint64_t seed);

/// Capsule radius used by render_depth.
inline constexpr double kDepthCapsuleRadiusMm = 60.0;

/// Two identical persons offset along the baseline of cameras A (rig[0])
/// and B (rig[1]). The second person is hidden from every camera but B, so
/// the beams of the first person in A and of the second in B meet off body
/// and form a phantom person that no other view contradicts by identity.
struct GhostScenario {
  RoomBounds room;
  std::vector<CameraCalib> rig;
  std::vector<CameraCalib> depth_rig;
  std::vector<GtPerson> persons;
  /// [camera][person] for `rig`.
  std::vector<std::vector<bool>> visible;
};

GhostScenario make_ghost_scenario(const SkeletonDef& skel, std::uint64_t seed);

struct SynthConfig {
  std::string name = "synthetic";
  std::string skeleton = "body13";
  RoomBounds room{Point3(-2000.0, -2000.0, 0.0), Point3(2000.0, 2000.0, 2200.0)};
  int frames = 1;
  int persons = 1;
  int cameras = 4;
  RigStyle style = RigStyle::Ring;
  std::uint64_t seed = 1;
  double jitter_px = 0.0;
  double dropout = 0.0;
  double pose_noise_mm = 0.0;
  double min_separation_mm = 1000.0;
  /// Adds depth-only cameras and inline depth points per frame.
  bool depth = false;
  int depth_cameras = 2;
  int points_per_joint = 100;
  /// Use the ghost scenario (fixed rig, two persons) for every frame.
  bool ghost = false;
};

DatasetDoc make_dataset(const SynthConfig& cfg);

}  // namespace vkf
