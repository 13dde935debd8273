#include "vkf/skeleton.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

namespace vkf {

namespace {

const std::vector<std::string> kCocoNames = {
    "nose",           "left_eye",       "right_eye",  "left_ear",    "right_ear",
    "left_shoulder",  "right_shoulder", "left_elbow", "right_elbow", "left_wrist",
    "right_wrist",    "left_hip",       "right_hip",  "left_knee",   "right_knee",
    "left_ankle",     "right_ankle"};

// Parents by name; torso joints are their own parents.
const std::vector<std::pair<std::string, std::string>> kCocoParents = {
    {"nose", "left_shoulder"},      {"left_eye", "nose"},
    {"right_eye", "nose"},          {"left_ear", "left_eye"},
    {"right_ear", "right_eye"},     {"left_shoulder", "left_shoulder"},
    {"right_shoulder", "right_shoulder"}, {"left_elbow", "left_shoulder"},
    {"right_elbow", "right_shoulder"},    {"left_wrist", "left_elbow"},
    {"right_wrist", "right_elbow"},       {"left_hip", "left_hip"},
    {"right_hip", "right_hip"},           {"left_knee", "left_hip"},
    {"right_knee", "right_hip"},          {"left_ankle", "left_knee"},
    {"right_ankle", "right_knee"}};

const std::vector<std::string> kTorsoNames = {"left_shoulder", "right_shoulder", "left_hip",
                                              "right_hip"};

// Arms, legs, the outer torso rectangle and the two shoulder-nose links.
const std::vector<std::pair<std::string, std::string>> kPcpParts = {
    {"left_shoulder", "left_elbow"}, {"left_elbow", "left_wrist"},
    {"right_shoulder", "right_elbow"}, {"right_elbow", "right_wrist"},
    {"left_hip", "left_knee"},       {"left_knee", "left_ankle"},
    {"right_hip", "right_knee"},     {"right_knee", "right_ankle"},
    {"left_shoulder", "right_shoulder"}, {"left_hip", "right_hip"},
    {"left_shoulder", "left_hip"},   {"right_shoulder", "right_hip"},
    {"left_shoulder", "nose"},       {"right_shoulder", "nose"}};

const std::vector<std::string> kBody13Names = {
    "nose",        "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
    "left_wrist",  "right_wrist",   "left_hip",       "right_hip",  "left_knee",
    "right_knee",  "left_ankle",    "right_ankle"};

void finish(SkeletonDef& skel, const std::vector<std::string>& eval_names) {
  skel.torso_joints.clear();
  for (const auto& n : kTorsoNames) skel.torso_joints.push_back(skel.index_of(n));

  // Breadth-first from the torso; children visited in index order.
  std::vector<std::vector<JointId>> children(skel.joint_names.size());
  for (JointId j = 0; j < skel.joint_count(); ++j) {
    if (skel.parent_of[j] != j) children[skel.parent_of[j]].push_back(j);
  }
  skel.limb_chains.clear();
  std::deque<JointId> queue(skel.torso_joints.begin(), skel.torso_joints.end());
  while (!queue.empty()) {
    const JointId j = queue.front();
    queue.pop_front();
    for (JointId c : children[j]) {
      skel.limb_chains.emplace_back(j, c);
      queue.push_back(c);
    }
  }

  skel.pcp_parts.clear();
  for (const auto& [a, b] : kPcpParts) {
    skel.pcp_parts.emplace_back(skel.index_of(a), skel.index_of(b));
  }
  skel.eval_joints.clear();
  for (const auto& n : eval_names) skel.eval_joints.push_back(skel.index_of(n));
  skel.validate();
}

SkeletonDef body_skeleton(std::string name, const std::vector<std::string>& joint_names) {
  SkeletonDef skel;
  skel.name = std::move(name);
  skel.joint_names = joint_names;
  skel.parent_of.assign(joint_names.size(), -1);
  skel.groups.assign(joint_names.size(), JointGroup::Body);
  for (const auto& [child, parent] : kCocoParents) {
    const auto it = std::find(joint_names.begin(), joint_names.end(), child);
    if (it == joint_names.end()) continue;
    skel.parent_of[it - joint_names.begin()] = skel.index_of(parent);
  }
  return skel;
}

}  // namespace

std::string_view to_string(JointGroup group) {
  switch (group) {
    case JointGroup::Body: return "body";
    case JointGroup::Foot: return "foot";
    case JointGroup::Face: return "face";
    case JointGroup::Hand: return "hand";
  }
  return "body";
}

bool SkeletonDef::is_torso(JointId j) const {
  return std::find(torso_joints.begin(), torso_joints.end(), j) != torso_joints.end();
}

JointId SkeletonDef::index_of(std::string_view joint_name) const {
  const auto it = std::find(joint_names.begin(), joint_names.end(), joint_name);
  if (it == joint_names.end()) {
    throw std::invalid_argument("skeleton '" + name + "' has no joint '" +
                                std::string(joint_name) + "'");
  }
  return static_cast<JointId>(it - joint_names.begin());
}

void SkeletonDef::validate() const {
  const auto n = joint_names.size();
  if (parent_of.size() != n || groups.size() != n) {
    throw std::logic_error(name + ": per-joint tables have inconsistent sizes");
  }
  if (std::set<std::string>(joint_names.begin(), joint_names.end()).size() != n) {
    throw std::logic_error(name + ": duplicate joint names");
  }
  for (JointId j = 0; j < joint_count(); ++j) {
    if (!valid_joint(parent_of[j])) throw std::logic_error(name + ": bad parent index");
    if (parent_of[j] == j && !is_torso(j)) {
      throw std::logic_error(name + ": root '" + joint_names[j] + "' is not a torso joint");
    }
  }
  std::vector<int> visits(n, 0);
  for (JointId t : torso_joints) ++visits[t];
  for (const auto& [p, c] : limb_chains) {
    if (visits[p] == 0) throw std::logic_error(name + ": limb chain visits child first");
    ++visits[c];
  }
  if (std::any_of(visits.begin(), visits.end(), [](int v) { return v != 1; })) {
    throw std::logic_error(name + ": joints not reachable exactly once from the torso");
  }
  for (const auto& [a, b] : pcp_parts) {
    if (!valid_joint(a) || !valid_joint(b) || a == b) {
      throw std::logic_error(name + ": bad pcp part");
    }
  }
  for (JointId j : eval_joints) {
    if (!valid_joint(j)) throw std::logic_error(name + ": bad eval joint");
  }
}

SkeletonDef coco17() {
  SkeletonDef skel = body_skeleton("coco17", kCocoNames);
  finish(skel, kBody13Names);
  return skel;
}

SkeletonDef body13() {
  SkeletonDef skel = body_skeleton("body13", kBody13Names);
  finish(skel, kBody13Names);
  return skel;
}

SkeletonDef wholebody133() {
  SkeletonDef skel = body_skeleton("wholebody133", kCocoNames);
  auto add = [&](std::string joint_name, JointId parent, JointGroup group) {
    skel.joint_names.push_back(std::move(joint_name));
    skel.parent_of.push_back(parent);
    skel.groups.push_back(group);
    return static_cast<JointId>(skel.joint_names.size() - 1);
  };

  const JointId left_ankle = skel.index_of("left_ankle");
  const JointId right_ankle = skel.index_of("right_ankle");
  for (const char* n : {"left_big_toe", "left_small_toe", "left_heel"}) {
    add(n, left_ankle, JointGroup::Foot);
  }
  for (const char* n : {"right_big_toe", "right_small_toe", "right_heel"}) {
    add(n, right_ankle, JointGroup::Foot);
  }

  const JointId nose = skel.index_of("nose");
  for (int i = 0; i < 68; ++i) add("face_" + std::to_string(i), nose, JointGroup::Face);

  for (const std::string side : {"left", "right"}) {
    const JointId wrist = skel.index_of(side + "_wrist");
    const JointId root = add(side + "_hand_root", wrist, JointGroup::Hand);
    // Five fingers of four joints each, chained outward from the hand root.
    for (int finger = 0; finger < 5; ++finger) {
      JointId parent = root;
      for (int k = 0; k < 4; ++k) {
        parent = add(side + "_hand_" + std::to_string(1 + finger * 4 + k), parent,
                     JointGroup::Hand);
      }
    }
  }
  finish(skel, kBody13Names);
  return skel;
}

SkeletonDef skeleton_by_name(std::string_view name) {
  if (name == "body13") return body13();
  if (name == "coco17") return coco17();
  if (name == "wholebody133") return wholebody133();
  throw std::invalid_argument("unknown skeleton '" + std::string(name) + "'");
}

std::vector<JointId> body13_in_coco17() {
  const SkeletonDef coco = coco17();
  std::vector<JointId> map;
  for (const auto& n : kBody13Names) map.push_back(coco.index_of(n));
  return map;
}

}  // namespace vkf
