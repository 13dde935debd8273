#include "vkf/persons.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "vkf/depthmask.hpp"

namespace vkf {

namespace {

bool better_candidate(const TaggedProposal& a, const TaggedProposal& b) {
  if (a.proposal.score != b.proposal.score) return a.proposal.score > b.proposal.score;
  return a.index < b.index;
}

IdSet set_union(const IdSet& a, const IdSet& b) {
  IdSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Point3 mean_of(const std::vector<Point3>& pts) {
  Point3 sum = Point3::Zero();
  for (const auto& p : pts) sum += p;
  return sum / static_cast<double>(pts.size());
}

// Highest score wins; ties go to the candidate nearer the group center.
const TaggedProposal* best_of(const std::vector<const TaggedProposal*>& candidates,
                              const Point3& center) {
  const TaggedProposal* best = nullptr;
  double best_dist = 0.0;
  for (const TaggedProposal* c : candidates) {
    const double d = (c->proposal.position - center).norm();
    if (best == nullptr || c->proposal.score > best->proposal.score ||
        (c->proposal.score == best->proposal.score &&
         (d < best_dist || (d == best_dist && c->index < best->index)))) {
      best = c;
      best_dist = d;
    }
  }
  return best;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

std::size_t PersonGroup::size() const {
  std::size_t n = 0;
  for (const auto& j : joints) n += j.size();
  return n;
}

int Pose3D::present() const {
  return static_cast<int>(std::count_if(joints.begin(), joints.end(),
                                        [](const auto& j) { return j.has_value(); }));
}

std::optional<IdSet> gather_ids(const Proposal& p, std::span<const ViewIds> views) {
  IdSet ids;
  for (const ViewIds& view : views) {
    const auto px = project(*view.calib, p.position);
    if (!px) continue;
    if (const auto id = sample_id(*view.ids, p.joint, *px)) ids.push_back(*id);
  }
  if (ids.empty()) return std::nullopt;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<PersonGroup> group_proposals(std::span<const TaggedProposal> proposals,
                                         int joint_count) {
  std::map<IdSet, PersonGroup> by_ids;
  for (const TaggedProposal& tp : proposals) {
    if (tp.ids.empty()) throw std::invalid_argument("group_proposals: proposal without ids");
    if (tp.proposal.joint < 0 || tp.proposal.joint >= joint_count) {
      throw std::invalid_argument("group_proposals: joint index out of range");
    }
    auto& group = by_ids[tp.ids];
    if (group.joints.empty()) {
      group.ids = tp.ids;
      group.joints.resize(joint_count);
    }
    group.joints[tp.proposal.joint].push_back(tp);
  }
  std::vector<PersonGroup> out;
  out.reserve(by_ids.size());
  for (auto& [ids, group] : by_ids) {
    for (auto& list : group.joints) std::sort(list.begin(), list.end(), better_candidate);
    out.push_back(std::move(group));
  }
  return out;
}

double overlap_ratio(const IdSet& a, const IdSet& b) {
  if (a.empty() || b.empty()) return 0.0;
  IdSet common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(std::min(a.size(), b.size()));
}

std::vector<PersonGroup> merge_groups(std::vector<PersonGroup> groups, double min_overlap) {
  auto by_ids = [](const PersonGroup& a, const PersonGroup& b) { return a.ids < b.ids; };
  std::sort(groups.begin(), groups.end(), by_ids);
  while (groups.size() > 1) {
    // Pair key: (ratio desc, combined size asc, ids lexicographic asc).
    std::size_t best_a = 0, best_b = 0;
    double best_ratio = -1.0;
    std::size_t best_size = 0;
    for (std::size_t a = 0; a < groups.size(); ++a) {
      for (std::size_t b = a + 1; b < groups.size(); ++b) {
        const double r = overlap_ratio(groups[a].ids, groups[b].ids);
        if (!(r > min_overlap)) continue;
        const std::size_t size = groups[a].ids.size() + groups[b].ids.size();
        // Groups are sorted, so the first pair found at a given (ratio, size)
        // is the lexicographically smallest.
        if (r > best_ratio || (r == best_ratio && size < best_size)) {
          best_ratio = r;
          best_size = size;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (best_ratio < 0.0) break;

    PersonGroup merged;
    merged.ids = set_union(groups[best_a].ids, groups[best_b].ids);
    merged.joints.resize(groups[best_a].joints.size());
    for (std::size_t j = 0; j < merged.joints.size(); ++j) {
      auto& list = merged.joints[j];
      list = groups[best_a].joints[j];
      list.insert(list.end(), groups[best_b].joints[j].begin(), groups[best_b].joints[j].end());
      std::sort(list.begin(), list.end(), better_candidate);
    }
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(best_b));
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(best_a));
    groups.insert(std::upper_bound(groups.begin(), groups.end(), merged, by_ids),
                  std::move(merged));
  }
  return groups;
}

double parent_limit_mm(const SkeletonDef& skel, JointId joint, const PersonConfig& cfg) {
  const JointGroup g = skel.groups[joint];
  return (g == JointGroup::Face || g == JointGroup::Hand) ? cfg.fine_limb_max_dist_mm
                                                          : cfg.limb_max_dist_mm;
}

std::optional<Pose3D> assemble_person(const PersonGroup& group, const SkeletonDef& skel,
                                      const PersonConfig& cfg) {
  const int joint_count = skel.joint_count();
  if (static_cast<int>(group.joints.size()) != joint_count) {
    throw std::invalid_argument("assemble_person: group does not match skeleton");
  }

  // Initial center from each joint's best proposal, then again without the
  // best proposals far from it. Only body joints count when there are any,
  // so dense face and hand landmarks do not drag the center to the head.
  const bool has_body = std::any_of(group.joints.begin(), group.joints.end(), [&](const auto& list) {
    return !list.empty() && skel.groups[list.front().proposal.joint] == JointGroup::Body;
  });
  std::vector<Point3> best_positions;
  for (int j = 0; j < joint_count; ++j) {
    const auto& list = group.joints[j];
    if (list.empty() || (has_body && skel.groups[j] != JointGroup::Body)) continue;
    best_positions.push_back(list.front().proposal.position);
  }
  if (best_positions.empty()) return std::nullopt;
  const Point3 center0 = mean_of(best_positions);
  std::vector<Point3> inliers;
  for (const auto& p : best_positions) {
    if ((p - center0).norm() <= cfg.center_outlier_mm) inliers.push_back(p);
  }
  const Point3 center = inliers.empty() ? center0 : mean_of(inliers);

  std::vector<std::vector<const TaggedProposal*>> candidates(joint_count);
  for (int j = 0; j < joint_count; ++j) {
    for (const auto& tp : group.joints[j]) {
      if ((tp.proposal.position - center).norm() <= cfg.center_outlier_mm) {
        candidates[j].push_back(&tp);
      }
    }
  }

  Pose3D pose;
  pose.joints.assign(joint_count, std::nullopt);
  pose.center = center;
  auto assign = [&](JointId j, const TaggedProposal* tp) {
    pose.joints[j] = JointEstimate{tp->proposal.position, tp->proposal.score, tp->index};
    pose.support = set_union(pose.support, tp->ids);
  };

  for (JointId t : skel.torso_joints) {
    if (const TaggedProposal* best = best_of(candidates[t], center)) assign(t, best);
  }
  for (const auto& [parent, child] : skel.limb_chains) {
    std::vector<const TaggedProposal*> allowed;
    if (pose.joints[parent]) {
      const double limit = parent_limit_mm(skel, child, cfg);
      for (const TaggedProposal* tp : candidates[child]) {
        if ((tp->proposal.position - pose.joints[parent]->position).norm() <= limit) {
          allowed.push_back(tp);
        }
      }
    } else {
      allowed = candidates[child];
    }
    if (const TaggedProposal* best = best_of(allowed, center)) assign(child, best);
  }

  const int present = pose.present();
  if (present < cfg.min_joints || present == 0) return std::nullopt;
  double sum = 0.0;
  for (const auto& j : pose.joints) {
    if (j) sum += j->score;
  }
  pose.score = sum / present;
  return pose;
}

void sort_poses(std::vector<Pose3D>& poses) {
  std::stable_sort(poses.begin(), poses.end(), [](const Pose3D& a, const Pose3D& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.center.x(), a.center.y(), a.center.z()) <
           std::tie(b.center.x(), b.center.y(), b.center.z());
  });
}

std::vector<Pose3D> assemble_persons(std::vector<PersonGroup> groups, const SkeletonDef& skel,
                                     const PersonConfig& cfg) {
  auto strongest = [](const PersonGroup& g) {
    float s = 0.0f;
    for (const auto& list : g.joints) {
      if (!list.empty()) s = std::max(s, list.front().proposal.score);
    }
    return s;
  };
  std::stable_sort(groups.begin(), groups.end(), [&](const PersonGroup& a, const PersonGroup& b) {
    const float sa = strongest(a), sb = strongest(b);
    return sa != sb ? sa > sb : a.ids < b.ids;
  });

  std::set<std::size_t> consumed;
  std::vector<Pose3D> poses;
  for (PersonGroup& group : groups) {
    if (cfg.exclusive_proposals && !consumed.empty()) {
      for (auto& list : group.joints) {
        std::erase_if(list, [&](const TaggedProposal& tp) { return consumed.contains(tp.index); });
      }
    }
    auto pose = assemble_person(group, skel, cfg);
    if (!pose) continue;
    for (const auto& j : pose->joints) {
      if (j) consumed.insert(j->proposal);
    }
    poses.push_back(std::move(*pose));
  }
  sort_poses(poses);
  if (!cfg.exclusive_detections) return poses;

  std::set<int> owned;
  std::vector<Pose3D> kept;
  for (Pose3D& pose : poses) {
    const auto taken = std::count_if(pose.support.begin(), pose.support.end(),
                                     [&](int id) { return owned.contains(id); });
    if (!pose.support.empty() &&
        static_cast<double>(taken) / static_cast<double>(pose.support.size()) > cfg.merge_overlap) {
      continue;
    }
    owned.insert(pose.support.begin(), pose.support.end());
    kept.push_back(std::move(pose));
  }
  return kept;
}

std::vector<std::string> pose_violations(const Pose3D& pose, const SkeletonDef& skel,
                                         const PersonConfig& cfg) {
  std::vector<std::string> out;
  if (static_cast<int>(pose.joints.size()) != skel.joint_count()) {
    out.push_back("joint count differs from skeleton");
    return out;
  }
  if (pose.present() < cfg.min_joints) out.push_back("fewer than min_joints joints");
  constexpr double kSlack = 1e-6;
  for (JointId j = 0; j < skel.joint_count(); ++j) {
    if (!pose.joints[j]) continue;
    const Point3& p = pose.joints[j]->position;
    if ((p - pose.center).norm() > cfg.center_outlier_mm + kSlack) {
      out.push_back(skel.joint_names[j] + " too far from center");
    }
    const JointId parent = skel.parent_of[j];
    if (parent != j && pose.joints[parent] &&
        (p - pose.joints[parent]->position).norm() > parent_limit_mm(skel, j, cfg) + kSlack) {
      out.push_back(skel.joint_names[j] + " too far from parent");
    }
  }
  return out;
}

FuseResult fuse_frame(std::span<const ViewInput> views, const SkeletonDef& skel,
                      const FusionConfig& cfg, const OccupancyGrid* mask, bool keep_grid) {
  if (views.size() < 2) throw std::invalid_argument("fuse_frame needs at least two views");
  using clock = std::chrono::steady_clock;
  FuseResult result;

  // Canonical view order and person numbering.
  std::vector<const ViewInput*> ordered;
  for (const auto& v : views) ordered.push_back(&v);
  std::sort(ordered.begin(), ordered.end(), [](const ViewInput* a, const ViewInput* b) {
    return a->calib.camera_id < b->calib.camera_id;
  });
  std::set<int> seen_ids;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (i > 0 && ordered[i]->calib.camera_id == ordered[i - 1]->calib.camera_id) {
      throw std::invalid_argument("duplicate camera id '" + ordered[i]->calib.camera_id + "'");
    }
    for (const auto& d : ordered[i]->detections) {
      if (!seen_ids.insert(d.person_id).second) {
        throw std::invalid_argument("person id " + std::to_string(d.person_id) +
                                    " used more than once in the frame");
      }
    }
  }

  auto t0 = clock::now();
  std::vector<RenderedView> rendered;
  rendered.reserve(ordered.size());
  int next_id = 1;
  for (const ViewInput* view : ordered) {
    std::vector<Detection2D> dets = view->detections;
    std::sort(dets.begin(), dets.end(), [](const Detection2D& a, const Detection2D& b) {
      return std::lexicographical_compare(
          a.keypoints.begin(), a.keypoints.end(), b.keypoints.begin(), b.keypoints.end(),
          [](const Keypoint2D& x, const Keypoint2D& y) {
            return std::tie(x.visible, x.u, x.v, x.confidence) <
                   std::tie(y.visible, y.u, y.v, y.confidence);
          });
    });
    for (auto& d : dets) {
      d.view_id = view->calib.camera_id;
      d.person_id = next_id++;
    }
    rendered.push_back(render_view(dets, skel, {view->calib.width, view->calib.height}, cfg.heatmap));
  }
  result.timings.heatmaps_ms = elapsed_ms(t0);

  t0 = clock::now();
  std::vector<ViewHeatmaps> heat_views;
  std::vector<ViewIds> id_views;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    heat_views.push_back({&ordered[i]->calib, &rendered[i].heatmaps});
    id_views.push_back({&ordered[i]->calib, &rendered[i].ids});
  }
  VoxelGrid grid = project_heatmaps(heat_views, cfg.grid);
  if (mask != nullptr) grid = apply_mask(std::move(grid), *mask);
  result.timings.projection_ms = elapsed_ms(t0);

  t0 = clock::now();
  const std::vector<Proposal> proposals =
      find_peaks(grid, cfg.grid.peak_threshold, cfg.grid.max_proposals);
  result.proposals = proposals.size();
  result.timings.peaks_ms = elapsed_ms(t0);

  t0 = clock::now();
  std::vector<TaggedProposal> tagged;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (auto ids = gather_ids(proposals[i], id_views)) {
      tagged.push_back({proposals[i], std::move(*ids), i});
    }
  }
  result.tagged_proposals = tagged.size();
  auto groups = merge_groups(group_proposals(tagged, skel.joint_count()), cfg.persons.merge_overlap);
  result.groups = groups.size();
  result.poses = assemble_persons(std::move(groups), skel, cfg.persons);
  result.timings.grouping_ms = elapsed_ms(t0);

  if (keep_grid) result.grid = std::move(grid);
  return result;
}

}  // namespace vkf
