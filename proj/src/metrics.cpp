#include "vkf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "vkf/persons.hpp"

namespace vkf {

namespace {

// Reported joint groups: all joints, body (incl. feet), face, hands.
constexpr int kGroupCount = 4;
const char* const kGroupNames[kGroupCount] = {"all", "body", "face", "hands"};

bool in_group(JointGroup g, int report_group) {
  switch (report_group) {
    case 0: return true;
    case 1: return g == JointGroup::Body || g == JointGroup::Foot;
    case 2: return g == JointGroup::Face;
    case 3: return g == JointGroup::Hand;
  }
  return false;
}

bool has_whole_body(const SkeletonDef& skel) {
  return std::any_of(skel.groups.begin(), skel.groups.end(),
                     [](JointGroup g) { return g != JointGroup::Body; });
}

struct Ratio {
  long correct = 0;
  long total = 0;
};

double percent(long num, long den) { return den > 0 ? 100.0 * num / den : 0.0; }

Ratio count_pcp(const MatchResult& m, std::span<const EvalPose> preds,
                std::span<const EvalPose> gts, const SkeletonDef& skel) {
  Ratio r;
  for (const MatchPair& pair : m.pairs) {
    const EvalPose& p = preds[pair.prediction];
    const EvalPose& g = gts[pair.ground_truth];
    for (const auto& [a, b] : skel.pcp_parts) {
      if (!g.joints[a] || !g.joints[b]) continue;
      ++r.total;
      if (!p.joints[a] || !p.joints[b]) continue;
      const double err = 0.5 * ((*p.joints[a] - *g.joints[a]).norm() +
                                (*p.joints[b] - *g.joints[b]).norm());
      if (err < 0.5 * (*g.joints[a] - *g.joints[b]).norm()) ++r.correct;
    }
  }
  return r;
}

Ratio count_pck(const MatchResult& m, std::span<const EvalPose> preds,
                std::span<const EvalPose> gts, std::span<const JointId> joints, double threshold) {
  Ratio r;
  for (const MatchPair& pair : m.pairs) {
    const EvalPose& p = preds[pair.prediction];
    const EvalPose& g = gts[pair.ground_truth];
    for (JointId j : joints) {
      if (!g.joints[j]) continue;
      ++r.total;
      if (p.joints[j] && (*p.joints[j] - *g.joints[j]).norm() < threshold) ++r.correct;
    }
  }
  return r;
}

long count_recall(const MatchResult& m, double threshold) {
  return static_cast<long>(std::count_if(m.pairs.begin(), m.pairs.end(),
                                         [&](const MatchPair& p) { return p.error_mm < threshold; }));
}

}  // namespace

EvalPose to_eval_pose(const Pose3D& pose) {
  EvalPose out;
  out.score = pose.score;
  out.joints.reserve(pose.joints.size());
  for (const auto& j : pose.joints) {
    out.joints.push_back(j ? std::optional<Point3>(j->position) : std::nullopt);
  }
  return out;
}

double mean_joint_error(const EvalPose& pred, const EvalPose& gt, std::span<const JointId> joints) {
  double sum = 0.0;
  int n = 0;
  auto visit = [&](std::size_t j) {
    if (j >= pred.joints.size() || j >= gt.joints.size()) return;
    if (!pred.joints[j] || !gt.joints[j]) return;
    sum += (*pred.joints[j] - *gt.joints[j]).norm();
    ++n;
  };
  if (joints.empty()) {
    for (std::size_t j = 0; j < pred.joints.size(); ++j) visit(j);
  } else {
    for (JointId j : joints) visit(static_cast<std::size_t>(j));
  }
  return n > 0 ? sum / n : kNoCommonJoints;
}

MatchResult match(std::span<const EvalPose> preds, std::span<const EvalPose> gts,
                  std::span<const JointId> joints, double cutoff_mm) {
  const int np = static_cast<int>(preds.size());
  const int ng = static_cast<int>(gts.size());
  std::vector<std::vector<double>> err(np, std::vector<double>(ng));
  for (int p = 0; p < np; ++p) {
    for (int g = 0; g < ng; ++g) err[p][g] = mean_joint_error(preds[p], gts[g], joints);
  }

  std::vector<int> order(np);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return preds[a].score > preds[b].score; });

  std::vector<int> holder(ng, -1);
  std::vector<std::vector<bool>> tried(np, std::vector<bool>(ng, false));
  for (int first : order) {
    int p = first;
    while (p >= 0) {
      int best = -1;
      for (int g = 0; g < ng; ++g) {
        if (tried[p][g] || !std::isfinite(err[p][g])) continue;
        if (best < 0 || err[p][g] < err[p][best]) best = g;
      }
      if (best < 0) break;  // nothing left to claim
      tried[p][best] = true;
      const int incumbent = holder[best];
      if (incumbent < 0) {
        holder[best] = p;
        p = -1;
      } else if (err[p][best] < err[incumbent][best]) {
        holder[best] = p;
        p = incumbent;  // the loser retries its remaining ground truths
      }
    }
  }

  MatchResult result;
  std::vector<bool> matched_pred(np, false);
  for (int g = 0; g < ng; ++g) {
    const int p = holder[g];
    if (p >= 0 && err[p][g] <= cutoff_mm) {
      result.pairs.push_back({p, g, err[p][g]});
      matched_pred[p] = true;
    } else {
      result.unmatched_gt.push_back(g);
    }
  }
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const MatchPair& a, const MatchPair& b) { return a.prediction < b.prediction; });
  for (int p = 0; p < np; ++p) {
    if (!matched_pred[p]) result.invalid_predictions.push_back(p);
  }
  return result;
}

void MetricCounts::add(const MetricCounts& o) {
  pcp_correct += o.pcp_correct;
  pcp_total += o.pcp_total;
  pck100_correct += o.pck100_correct;
  pck500_correct += o.pck500_correct;
  pck_total += o.pck_total;
  mpjpe_sum += o.mpjpe_sum;
  matched += o.matched;
  recall100 += o.recall100;
  recall500 += o.recall500;
  gt_total += o.gt_total;
  invalid += o.invalid;
  pred_total += o.pred_total;
  if (group_error_sum.size() < o.group_error_sum.size()) {
    group_error_sum.resize(o.group_error_sum.size(), 0.0);
    group_persons.resize(o.group_persons.size(), 0);
  }
  for (std::size_t i = 0; i < o.group_error_sum.size(); ++i) {
    group_error_sum[i] += o.group_error_sum[i];
    group_persons[i] += o.group_persons[i];
  }
}

double f1_score(double invalid, double recall500) {
  const double precision = 100.0 - invalid;
  if (precision + recall500 <= 0.0) return 0.0;
  return 2.0 * precision * recall500 / (precision + recall500);
}

double pcp(const MatchResult& m, std::span<const EvalPose> preds, std::span<const EvalPose> gts,
           const SkeletonDef& skel) {
  const Ratio r = count_pcp(m, preds, gts, skel);
  return percent(r.correct, r.total);
}

double pck(const MatchResult& m, std::span<const EvalPose> preds, std::span<const EvalPose> gts,
           std::span<const JointId> joints, double threshold_mm) {
  const Ratio r = count_pck(m, preds, gts, joints, threshold_mm);
  return percent(r.correct, r.total);
}

double mpjpe(const MatchResult& m) {
  if (m.pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : m.pairs) sum += p.error_mm;
  return sum / static_cast<double>(m.pairs.size());
}

double recall(const MatchResult& m, std::size_t gt_count, double threshold_mm) {
  return percent(count_recall(m, threshold_mm), static_cast<long>(gt_count));
}

double invalid_pct(const MatchResult& m, std::size_t pred_count) {
  return percent(static_cast<long>(m.invalid_predictions.size()), static_cast<long>(pred_count));
}

MetricCounts count_frame(std::span<const EvalPose> preds, std::span<const EvalPose> gts,
                         const SkeletonDef& skel) {
  const MatchResult m = match(preds, gts, skel.eval_joints);
  MetricCounts c;
  const Ratio parts = count_pcp(m, preds, gts, skel);
  c.pcp_correct = parts.correct;
  c.pcp_total = parts.total;
  const Ratio k100 = count_pck(m, preds, gts, skel.eval_joints, 100.0);
  const Ratio k500 = count_pck(m, preds, gts, skel.eval_joints, 500.0);
  c.pck100_correct = k100.correct;
  c.pck500_correct = k500.correct;
  c.pck_total = k100.total;
  for (const auto& p : m.pairs) c.mpjpe_sum += p.error_mm;
  c.matched = static_cast<long>(m.pairs.size());
  c.recall100 = count_recall(m, 100.0);
  c.recall500 = count_recall(m, 500.0);
  c.gt_total = static_cast<long>(gts.size());
  c.invalid = static_cast<long>(m.invalid_predictions.size());
  c.pred_total = static_cast<long>(preds.size());

  if (has_whole_body(skel)) {
    c.group_error_sum.assign(kGroupCount, 0.0);
    c.group_persons.assign(kGroupCount, 0);
    for (int grp = 0; grp < kGroupCount; ++grp) {
      std::vector<JointId> members;
      for (JointId j = 0; j < skel.joint_count(); ++j) {
        if (in_group(skel.groups[j], grp)) members.push_back(j);
      }
      for (const auto& p : m.pairs) {
        const double e = mean_joint_error(preds[p.prediction], gts[p.ground_truth], members);
        if (!std::isfinite(e)) continue;
        c.group_error_sum[grp] += e;
        ++c.group_persons[grp];
      }
    }
  }
  return c;
}

MetricReport make_report(const MetricCounts& c, const SkeletonDef& skel) {
  MetricReport r;
  r.pcp = percent(c.pcp_correct, c.pcp_total);
  r.pck100 = percent(c.pck100_correct, c.pck_total);
  r.pck500 = percent(c.pck500_correct, c.pck_total);
  r.mpjpe_mm = c.matched > 0 ? c.mpjpe_sum / c.matched : 0.0;
  r.recall100 = percent(c.recall100, c.gt_total);
  r.recall500 = percent(c.recall500, c.gt_total);
  r.invalid_pct = percent(c.invalid, c.pred_total);
  r.f1 = f1_score(r.invalid_pct, r.recall500);
  r.predictions = c.pred_total;
  r.ground_truths = c.gt_total;
  r.matched = c.matched;
  if (has_whole_body(skel) && c.group_error_sum.size() == kGroupCount) {
    for (int g = 0; g < kGroupCount; ++g) {
      const double v = c.group_persons[g] > 0 ? c.group_error_sum[g] / c.group_persons[g] : 0.0;
      r.mpjpe_groups.emplace_back(kGroupNames[g], v);
    }
  }
  return r;
}

nlohmann::json report_to_json(const MetricReport& r) {
  nlohmann::json j = {{"pcp", r.pcp},
                      {"pck@100", r.pck100},
                      {"pck@500", r.pck500},
                      {"mpjpe_mm", r.mpjpe_mm},
                      {"recall@100", r.recall100},
                      {"recall@500", r.recall500},
                      {"invalid_pct", r.invalid_pct},
                      {"f1", r.f1},
                      {"predictions", r.predictions},
                      {"ground_truths", r.ground_truths},
                      {"matched", r.matched}};
  if (!r.mpjpe_groups.empty()) {
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [name, v] : r.mpjpe_groups) groups[name] = v;
    j["mpjpe_groups_mm"] = groups;
  }
  return j;
}

std::string report_table(const MetricReport& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%8s %8s %8s %8s %10s %10s %8s %8s\n", "PCP", "PCK@100",
                "PCK@500", "MPJPE", "Recall@100", "Recall@500", "Invalid", "F1");
  out << line;
  std::snprintf(line, sizeof line, "%8.1f %8.1f %8.1f %8.1f %10.1f %10.1f %8.1f %8.1f\n", r.pcp,
                r.pck100, r.pck500, r.mpjpe_mm, r.recall100, r.recall500, r.invalid_pct, r.f1);
  out << line;
  if (!r.mpjpe_groups.empty()) {
    out << "MPJPE";
    for (const auto& [name, v] : r.mpjpe_groups) {
      std::snprintf(line, sizeof line, "  %s %.1f", name.c_str(), v);
      out << line;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace vkf
