#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vkf/calib.hpp"
#include "vkf/fusion.hpp"
#include "vkf/heatmap2d.hpp"
#include "vkf/skeleton.hpp"

namespace vkf {

struct OccupancyGrid;

/// Sorted, duplicate-free person ids collected for one proposal.
using IdSet = std::vector<int>;

struct TaggedProposal {
  Proposal proposal;
  IdSet ids;
  /// Position in the frame's proposal list; identifies the proposal.
  std::size_t index = 0;
};

struct PersonGroup {
  IdSet ids;
  /// Candidates per joint, descending score.
  std::vector<std::vector<TaggedProposal>> joints;

  std::size_t size() const;
};

struct JointEstimate {
  Point3 position = Point3::Zero();
  double score = 0.0;
  std::size_t proposal = 0;
};

struct Pose3D {
  std::vector<std::optional<JointEstimate>> joints;
  /// Mean score of the present joints.
  double score = 0.0;
  /// Refined group center used for the distance filters.
  Point3 center = Point3::Zero();
  /// Person ids of the 2D detections behind the chosen proposals.
  IdSet support;

  int present() const;
};

struct PersonConfig {
  double center_outlier_mm = 1300.0;
  double limb_max_dist_mm = 600.0;
  /// Parent distance bound for face and hand joints.
  double fine_limb_max_dist_mm = 300.0;
  int min_joints = 3;
  double merge_overlap = 0.5;
  /// A proposal used by one person is removed from later persons' groups.
  bool exclusive_proposals = true;
  /// A person is dropped when more than `merge_overlap` of its supporting
  /// detections already support stronger persons.
  bool exclusive_detections = true;
};

struct ViewIds {
  const CameraCalib* calib = nullptr;
  const IdImageStack* ids = nullptr;
};

/// Ids found at the proposal's reprojection in each view's id image of the
/// proposal's joint; nullopt when no view yields an id.
std::optional<IdSet> gather_ids(const Proposal& p, std::span<const ViewIds> views);

/// Groups proposals with identical id sets; groups sorted by id set.
std::vector<PersonGroup> group_proposals(std::span<const TaggedProposal> proposals, int joint_count);

/// |A and B| / min(|A|, |B|).
double overlap_ratio(const IdSet& a, const IdSet& b);

/// Merges groups whose overlap ratio exceeds `min_overlap` until no pair
/// qualifies. Highest ratio first; ties by smaller combined size, then by
/// lexicographic id sets.
std::vector<PersonGroup> merge_groups(std::vector<PersonGroup> groups, double min_overlap);

/// Builds one person from a group, center outward; nullopt when fewer than
/// cfg.min_joints joints survive.
std::optional<Pose3D> assemble_person(const PersonGroup& group, const SkeletonDef& skel,
                                      const PersonConfig& cfg);

/// Assembles every group, strongest group first, honoring
/// cfg.exclusive_proposals, then applies cfg.exclusive_detections in
/// descending person score. Output sorted by descending person score.
std::vector<Pose3D> assemble_persons(std::vector<PersonGroup> groups, const SkeletonDef& skel,
                                     const PersonConfig& cfg);

/// Parent distance bound applied to `joint` during assembly.
double parent_limit_mm(const SkeletonDef& skel, JointId joint, const PersonConfig& cfg);

/// Human readable list of violated output invariants (empty when valid).
std::vector<std::string> pose_violations(const Pose3D& pose, const SkeletonDef& skel,
                                         const PersonConfig& cfg);

/// Descending score; ties by center coordinates.
void sort_poses(std::vector<Pose3D>& poses);

// ---------------------------------------------------------------------------
// Whole-frame pipeline

struct FusionConfig {
  HeatmapConfig heatmap;
  GridConfig grid;
  PersonConfig persons;
};

struct ViewInput {
  CameraCalib calib;
  std::vector<Detection2D> detections;
};

struct StageTimings {
  double heatmaps_ms = 0.0;
  double projection_ms = 0.0;
  double peaks_ms = 0.0;
  double grouping_ms = 0.0;

  double total_ms() const { return heatmaps_ms + projection_ms + peaks_ms + grouping_ms; }
};

struct FuseResult {
  std::vector<Pose3D> poses;
  StageTimings timings;
  std::size_t proposals = 0;
  std::size_t tagged_proposals = 0;
  std::size_t groups = 0;
  /// Fused score grid, kept only on request.
  std::optional<VoxelGrid> grid;
};

/// Heatmaps, voxel fusion, optional depth masking, peak finding, id
/// gathering, grouping and assembly for one frame. Views are processed in
/// camera-id order and person ids are reassigned canonically, so the result
/// does not depend on view order or on the input person numbering. Throws
/// std::invalid_argument for fewer than two views, duplicate camera ids or
/// duplicate person ids.
FuseResult fuse_frame(std::span<const ViewInput> views, const SkeletonDef& skel,
                      const FusionConfig& cfg, const OccupancyGrid* mask = nullptr,
                      bool keep_grid = false);

}  // namespace vkf
