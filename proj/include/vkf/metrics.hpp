#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vkf/calib.hpp"
#include "vkf/skeleton.hpp"

namespace vkf {

struct Pose3D;

/// Skeleton instance as seen by the evaluation: optional joint positions and
/// a score used to order predictions.
struct EvalPose {
  std::vector<std::optional<Point3>> joints;
  double score = 0.0;
};

EvalPose to_eval_pose(const Pose3D& pose);

constexpr double kMatchCutoffMm = 500.0;
constexpr double kNoCommonJoints = std::numeric_limits<double>::infinity();

/// Mean distance over joints (restricted to `joints`, or all when empty)
/// present in both poses; infinity when they share none.
double mean_joint_error(const EvalPose& pred, const EvalPose& gt, std::span<const JointId> joints);

struct MatchPair {
  int prediction = 0;
  int ground_truth = 0;
  double error_mm = 0.0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<int> unmatched_gt;
  std::vector<int> invalid_predictions;
};

/// Each prediction, taken in descending score order, claims its closest
/// ground truth; a prediction with a smaller error displaces the holder,
/// which then retries the remaining ground truths. Pairs above `cutoff_mm`
/// and predictions sharing no joint with any ground truth become invalid.
MatchResult match(std::span<const EvalPose> preds, std::span<const EvalPose> gts,
                  std::span<const JointId> joints, double cutoff_mm = kMatchCutoffMm);

/// Pooled counts for one or more frames; percentages are formed only when
/// reporting, so frames are weighted by their persons and parts.
struct MetricCounts {
  long pcp_correct = 0, pcp_total = 0;
  long pck100_correct = 0, pck500_correct = 0, pck_total = 0;
  double mpjpe_sum = 0.0;
  long matched = 0;
  long recall100 = 0, recall500 = 0, gt_total = 0;
  long invalid = 0, pred_total = 0;
  /// Per joint group: sum of per-person mean errors and person counts.
  std::vector<double> group_error_sum;
  std::vector<long> group_persons;

  void add(const MetricCounts& other);
};

struct MetricReport {
  double pcp = 0.0;
  double pck100 = 0.0;
  double pck500 = 0.0;
  double mpjpe_mm = 0.0;
  double recall100 = 0.0;
  double recall500 = 0.0;
  double invalid_pct = 0.0;
  double f1 = 0.0;
  long predictions = 0;
  long ground_truths = 0;
  long matched = 0;
  /// "all", "body", "face", "hands" mean errors when the skeleton has
  /// whole-body joints.
  std::vector<std::pair<std::string, double>> mpjpe_groups;
};

/// Harmonic mean of (100 - invalid_pct) and recall500; 0 when both are 0.
double f1_score(double invalid_pct, double recall500);

/// Percentage of correct parts over matched pairs; a part is correct when
/// the mean error of its endpoints is below half the ground-truth part
/// length. Parts with a missing predicted endpoint count as incorrect.
double pcp(const MatchResult& m, std::span<const EvalPose> preds, std::span<const EvalPose> gts,
           const SkeletonDef& skel);
/// Percentage of ground-truth keypoints of matched persons predicted within
/// `threshold_mm`.
double pck(const MatchResult& m, std::span<const EvalPose> preds, std::span<const EvalPose> gts,
           std::span<const JointId> joints, double threshold_mm);
/// Mean over matched persons of the per-person mean joint error.
double mpjpe(const MatchResult& m);
/// Percentage of ground-truth persons matched with error below `threshold_mm`.
double recall(const MatchResult& m, std::size_t gt_count, double threshold_mm);
double invalid_pct(const MatchResult& m, std::size_t pred_count);

/// Metric accumulation for one frame.
MetricCounts count_frame(std::span<const EvalPose> preds, std::span<const EvalPose> gts,
                         const SkeletonDef& skel);

MetricReport make_report(const MetricCounts& counts, const SkeletonDef& skel);

nlohmann::json report_to_json(const MetricReport& report);
/// Aligned table: PCP, PCK@100, PCK@500, MPJPE, Recall@100, Recall@500,
/// Invalid, F1.
std::string report_table(const MetricReport& report);

}  // namespace vkf
