#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vkf {

using JointId = int;

enum class JointGroup { Body, Foot, Face, Hand };

std::string_view to_string(JointGroup group);

/// Joint topology shared by the fusion, assembly and evaluation stages.
///
/// parent_of[j] == j marks a root; all roots are torso joints. limb_chains
/// lists (parent, child) edges in breadth-first order starting from the
/// torso, so walking it front to back always visits a parent before its
/// children.
struct SkeletonDef {
  std::string name;
  std::vector<std::string> joint_names;
  std::vector<JointId> parent_of;
  std::vector<JointId> torso_joints;
  std::vector<std::pair<JointId, JointId>> limb_chains;
  std::vector<std::pair<JointId, JointId>> pcp_parts;
  std::vector<JointGroup> groups;
  /// Joints scored by the standard metric suite.
  std::vector<JointId> eval_joints;

  int joint_count() const { return static_cast<int>(joint_names.size()); }
  bool valid_joint(JointId j) const { return j >= 0 && j < joint_count(); }
  bool is_torso(JointId j) const;
  JointId index_of(std::string_view joint_name) const;

  /// Throws std::logic_error when the structural invariants do not hold.
  void validate() const;
};

/// 17-keypoint COCO body ordering.
SkeletonDef coco17();
/// The 13 evaluated body joints (COCO order without eyes and ears). The head
/// joint is the nose.
SkeletonDef body13();
/// COCO-WholeBody: 17 body, 6 foot, 68 face, 2 x 21 hand keypoints.
SkeletonDef wholebody133();

/// "body13", "coco17" or "wholebody133"; throws std::invalid_argument otherwise.
SkeletonDef skeleton_by_name(std::string_view name);

/// Index map such that body13 joint i is coco17 joint map[i].
std::vector<JointId> body13_in_coco17();

}  // namespace vkf
