#include <algorithm>
#include <set>

#include <doctest.h>

#include "vkf/skeleton.hpp"

using namespace vkf;

namespace {

// Every joint is a torso root or reached exactly once as a child, and each
// parent is placed before its children.
void check_chain_order(const SkeletonDef& s) {
  std::vector<int> visits(s.joint_count(), 0);
  std::vector<bool> placed(s.joint_count(), false);
  for (JointId t : s.torso_joints) {
    visits[t]++;
    placed[t] = true;
  }
  for (const auto& [parent, child] : s.limb_chains) {
    CHECK(placed[parent]);
    CHECK(s.parent_of[child] == parent);
    visits[child]++;
    placed[child] = true;
  }
  for (JointId j = 0; j < s.joint_count(); ++j) {
    INFO(s.name << " joint " << s.joint_names[j]);
    CHECK(visits[j] == 1);
  }
}

std::set<std::string> names_of(const SkeletonDef& s, const std::vector<JointId>& ids) {
  std::set<std::string> out;
  for (JointId j : ids) out.insert(s.joint_names[j]);
  return out;
}

}  // namespace

TEST_CASE("body13: 13 joints, 14 scored parts, shoulder and hip torso") {
  const SkeletonDef s = body13();
  CHECK(s.joint_count() == 13);
  CHECK(s.pcp_parts.size() == 14);
  CHECK(names_of(s, s.torso_joints) ==
        std::set<std::string>{"left_shoulder", "right_shoulder", "left_hip", "right_hip"});
  CHECK(s.eval_joints.size() == 13);
  s.validate();
}

TEST_CASE("body13 parts: arms, legs, outer torso and head connections") {
  const SkeletonDef s = body13();
  std::set<std::set<std::string>> parts;
  for (const auto& [a, b] : s.pcp_parts) parts.insert({s.joint_names[a], s.joint_names[b]});
  const std::set<std::set<std::string>> expected = {
      {"left_shoulder", "left_elbow"},   {"left_elbow", "left_wrist"},
      {"right_shoulder", "right_elbow"}, {"right_elbow", "right_wrist"},
      {"left_hip", "left_knee"},         {"left_knee", "left_ankle"},
      {"right_hip", "right_knee"},       {"right_knee", "right_ankle"},
      {"left_shoulder", "right_shoulder"}, {"left_hip", "right_hip"},
      {"left_shoulder", "left_hip"},     {"right_shoulder", "right_hip"},
      {"left_shoulder", "nose"},         {"right_shoulder", "nose"},
  };
  CHECK(parts == expected);
}

TEST_CASE("coco17 keeps the standard keypoint order") {
  const SkeletonDef s = coco17();
  const std::vector<std::string> order = {
      "nose",       "left_eye",    "right_eye",      "left_ear",   "right_ear",  "left_shoulder",
      "right_shoulder", "left_elbow", "right_elbow", "left_wrist", "right_wrist", "left_hip",
      "right_hip",  "left_knee",   "right_knee",     "left_ankle", "right_ankle"};
  CHECK(s.joint_names == order);
  s.validate();
}

TEST_CASE("body13 is a projection of coco17") {
  const SkeletonDef b = body13();
  const SkeletonDef c = coco17();
  const auto map = body13_in_coco17();
  REQUIRE(map.size() == 13);
  for (JointId j = 0; j < 13; ++j) CHECK(c.joint_names[map[j]] == b.joint_names[j]);
}

TEST_CASE("wholebody133: group sizes and anchors") {
  const SkeletonDef s = wholebody133();
  CHECK(s.joint_count() == 133);
  auto count = [&](JointGroup g) { return std::count(s.groups.begin(), s.groups.end(), g); };
  CHECK(count(JointGroup::Body) == 17);
  CHECK(count(JointGroup::Foot) == 6);
  CHECK(count(JointGroup::Face) == 68);
  CHECK(count(JointGroup::Hand) == 42);

  const JointId nose = s.index_of("nose");
  for (JointId j = 0; j < s.joint_count(); ++j) {
    if (s.groups[j] == JointGroup::Face) CHECK(s.parent_of[j] == nose);
  }
  CHECK(s.parent_of[s.index_of("left_hand_root")] == s.index_of("left_wrist"));
  CHECK(s.parent_of[s.index_of("right_hand_root")] == s.index_of("right_wrist"));
  CHECK(s.parent_of[s.index_of("left_heel")] == s.index_of("left_ankle"));

  // The first 17 joints follow the body ordering.
  const SkeletonDef c = coco17();
  for (JointId j = 0; j < 17; ++j) CHECK(s.joint_names[j] == c.joint_names[j]);
  // Evaluated joints are the 13 body joints.
  CHECK(names_of(s, s.eval_joints) == names_of(body13(), body13().eval_joints));
  s.validate();
}

TEST_CASE("limb chains visit every joint once, parents first") {
  for (const SkeletonDef& s : {body13(), coco17(), wholebody133()}) {
    INFO(s.name);
    check_chain_order(s);
  }
}

TEST_CASE("names are unique and lookups are exact") {
  for (const SkeletonDef& s : {body13(), coco17(), wholebody133()}) {
    std::set<std::string> unique(s.joint_names.begin(), s.joint_names.end());
    CHECK(unique.size() == s.joint_names.size());
    for (JointId j = 0; j < s.joint_count(); ++j) CHECK(s.index_of(s.joint_names[j]) == j);
  }
  CHECK_THROWS_AS(body13().index_of("left_eye"), std::invalid_argument);
}

TEST_CASE("skeleton_by_name") {
  CHECK(skeleton_by_name("body13").joint_count() == 13);
  CHECK(skeleton_by_name("coco17").joint_count() == 17);
  CHECK(skeleton_by_name("wholebody133").joint_count() == 133);
  CHECK_THROWS_AS(skeleton_by_name("h36m"), std::invalid_argument);
}

TEST_CASE("validate catches broken topologies") {
  SkeletonDef s = body13();
  s.limb_chains.pop_back();
  CHECK_THROWS(s.validate());

  s = body13();
  s.joint_names[1] = s.joint_names[0];
  CHECK_THROWS(s.validate());

  s = body13();
  s.pcp_parts.emplace_back(0, 99);
  CHECK_THROWS(s.validate());
}
