#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Geometry>
#include <doctest.h>

#include "match_oracle.hpp"
#include "vkf/metrics.hpp"

using namespace vkf;

namespace {

EvalPose pose_at(const std::vector<Point3>& joints, double score = 1.0) {
  EvalPose e;
  e.score = score;
  for (const auto& j : joints) e.joints.emplace_back(j);
  return e;
}

EvalPose shifted(const EvalPose& e, const Point3& d, double score) {
  EvalPose out = e;
  out.score = score;
  for (auto& j : out.joints) {
    if (j) *j += d;
  }
  return out;
}

// body13 person standing at the origin.
EvalPose body(double x = 0.0) {
  const SkeletonDef s = body13();
  std::vector<Point3> p(13);
  auto set = [&](const char* n, double dx, double z) { p[s.index_of(n)] = Point3(x + dx, 0, z); };
  set("nose", 0, 1650);
  set("left_shoulder", 180, 1450);
  set("right_shoulder", -180, 1450);
  set("left_elbow", 200, 1170);
  set("right_elbow", -200, 1170);
  set("left_wrist", 210, 920);
  set("right_wrist", -210, 920);
  set("left_hip", 110, 950);
  set("right_hip", -110, 950);
  set("left_knee", 120, 520);
  set("right_knee", -120, 520);
  set("left_ankle", 120, 90);
  set("right_ankle", -120, 90);
  return pose_at(p);
}

}  // namespace

TEST_CASE("mean joint error uses joints present in both") {
  EvalPose a = pose_at({Point3(0, 0, 0), Point3(0, 0, 0), Point3(0, 0, 0)});
  EvalPose b = pose_at({Point3(30, 0, 0), Point3(0, 40, 0), Point3(0, 0, 1000)});
  b.joints[2] = std::nullopt;
  CHECK(mean_joint_error(a, b, {}) == doctest::Approx(35.0));
  const std::vector<JointId> only0{0};
  CHECK(mean_joint_error(a, b, only0) == doctest::Approx(30.0));
  a.joints[0] = a.joints[1] = std::nullopt;
  CHECK(mean_joint_error(a, b, {}) == kNoCommonJoints);
}

TEST_CASE("matching examples") {
  const EvalPose gt = body();
  SUBCASE("exact prediction") {
    const std::vector<EvalPose> p{gt}, g{gt};
    const MatchResult m = match(p, g, {});
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].error_mm == 0.0);
    CHECK(m.invalid_predictions.empty());
  }
  SUBCASE("600 mm away") {
    const std::vector<EvalPose> p{shifted(gt, Point3(600, 0, 0), 1.0)}, g{gt};
    const MatchResult m = match(p, g, {});
    CHECK(m.pairs.empty());
    CHECK(m.invalid_predictions == std::vector<int>{0});
    CHECK(m.unmatched_gt == std::vector<int>{0});
  }
  SUBCASE("the better claim is kept and the other one retries") {
    const EvalPose gt2 = body(3000.0);
    // The weaker-scored prediction is closer, so it displaces the first claim.
    const std::vector<EvalPose> p{shifted(gt, Point3(60, 0, 0), 0.9), shifted(gt, Point3(40, 0, 0), 0.5)};
    const std::vector<EvalPose> g{gt, gt2};
    const MatchResult m = match(p, g, {});
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].prediction == 1);
    CHECK(m.pairs[0].ground_truth == 0);
    CHECK(m.pairs[0].error_mm == doctest::Approx(40.0));
    CHECK(m.invalid_predictions == std::vector<int>{0});
    CHECK(m.unmatched_gt == std::vector<int>{1});

    // With the second person within reach the loser takes it.
    const EvalPose near2 = body(400.0);
    const std::vector<EvalPose> g2{gt, near2};
    const MatchResult m2 = match(p, g2, {});
    CHECK(test::pair_set(m2) == std::set<std::pair<int, int>>{{1, 0}, {0, 1}});
  }
  SUBCASE("no common joints") {
    EvalPose empty = gt;
    for (auto& j : empty.joints) j = std::nullopt;
    const std::vector<EvalPose> p{empty}, g{gt};
    const MatchResult m = match(p, g, {});
    CHECK(m.invalid_predictions == std::vector<int>{0});
  }
}

TEST_CASE("match agrees with exhaustive search") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const auto [preds, gts] = test::random_match_instance(rng);
    const MatchResult m = match(preds, gts, {});
    CHECK(test::pair_set(m) == test::brute_force_match(preds, gts));
    // Every prediction is either matched or invalid, every gt matched or not.
    CHECK(m.pairs.size() + m.invalid_predictions.size() == preds.size());
    CHECK(m.pairs.size() + m.unmatched_gt.size() == gts.size());
  }
}

TEST_CASE("F1 against published rows") {
  CHECK(f1_score(0.0, 100.0) == doctest::Approx(100.0));
  CHECK(f1_score(1.0, 100.0) == doctest::Approx(99.5).epsilon(1e-3));
  CHECK(std::abs(f1_score(16.6, 81.3) - 82.4) <= 0.1);
  CHECK(f1_score(100.0, 0.0) == 0.0);
}

TEST_CASE("PCP") {
  const SkeletonDef skel = body13();
  const EvalPose gt = body();
  SUBCASE("endpoints at a quarter of the limb length are correct") {
    // Shift every joint by a quarter of the shortest part.
    double shortest = 1e9;
    for (const auto& [a, b] : skel.pcp_parts) shortest = std::min(shortest, (*gt.joints[a] - *gt.joints[b]).norm());
    const EvalPose p = shifted(gt, Point3(shortest / 4.0, 0, 0), 1.0);
    const std::vector<EvalPose> ps{p}, gs{gt};
    CHECK(pcp(match(ps, gs, {}), ps, gs, skel) == doctest::Approx(100.0));
  }
  SUBCASE("a missing endpoint makes the part incorrect") {
    EvalPose p = gt;
    p.joints[skel.index_of("left_wrist")] = std::nullopt;
    const std::vector<EvalPose> ps{p}, gs{gt};
    CHECK(pcp(match(ps, gs, {}), ps, gs, skel) == doctest::Approx(100.0 * 13.0 / 14.0));
  }
  SUBCASE("random recount") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 120.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<EvalPose> gs{body(0.0), body(2000.0)}, ps;
      for (const auto& g : gs) {
        EvalPose p = g;
        for (auto& j : p.joints) {
          *j += Point3(n(rng), n(rng), n(rng));
          if (n(rng) > 150.0) j = std::nullopt;
        }
        ps.push_back(p);
      }
      const MatchResult m = match(ps, gs, {});
      long correct = 0, total = 0;
      for (const MatchPair& mp : m.pairs) {
        const EvalPose& p = ps[mp.prediction];
        const EvalPose& g = gs[mp.ground_truth];
        for (const auto& [a, b] : skel.pcp_parts) {
          ++total;
          if (!p.joints[a] || !p.joints[b]) continue;
          const double e = ((*p.joints[a] - *g.joints[a]).norm() + (*p.joints[b] - *g.joints[b]).norm()) / 2.0;
          if (e < (*g.joints[a] - *g.joints[b]).norm() / 2.0) ++correct;
        }
      }
      CHECK(pcp(m, ps, gs, skel) == doctest::Approx(total ? 100.0 * correct / total : 0.0));
    }
  }
}

TEST_CASE("PCK, recall, MPJPE and invalid") {
  const SkeletonDef skel = body13();
  const EvalPose gt = body(), gt2 = body(3000.0);
  const std::vector<EvalPose> gs{gt, gt2};
  const std::vector<EvalPose> ps{shifted(gt, Point3(50, 0, 0), 0.9), shifted(gt2, Point3(0, 200, 0), 0.8),
                                 shifted(gt2, Point3(0, 0, 5000), 0.1)};
  const MatchResult m = match(ps, gs, skel.eval_joints);
  CHECK(pck(m, ps, gs, skel.eval_joints, 100.0) == doctest::Approx(50.0));
  CHECK(pck(m, ps, gs, skel.eval_joints, 500.0) == doctest::Approx(100.0));
  CHECK(recall(m, gs.size(), 100.0) == doctest::Approx(50.0));
  CHECK(recall(m, gs.size(), 500.0) == doctest::Approx(100.0));
  CHECK(mpjpe(m) == doctest::Approx(125.0));
  CHECK(invalid_pct(m, ps.size()) == doctest::Approx(100.0 / 3.0));
}

TEST_CASE("self evaluation and empty predictions") {
  const SkeletonDef skel = body13();
  const std::vector<EvalPose> gs{body(0.0), body(1500.0), body(-1500.0)};
  MetricReport r = make_report(count_frame(gs, gs, skel), skel);
  CHECK(r.pcp == 100.0);
  CHECK(r.pck100 == 100.0);
  CHECK(r.pck500 == 100.0);
  CHECK(r.mpjpe_mm == 0.0);
  CHECK(r.recall100 == 100.0);
  CHECK(r.recall500 == 100.0);
  CHECK(r.invalid_pct == 0.0);
  CHECK(r.f1 == 100.0);

  r = make_report(count_frame({}, gs, skel), skel);
  CHECK(r.recall500 == 0.0);
  CHECK(r.invalid_pct == 0.0);
  CHECK(r.f1 == 0.0);
}

TEST_CASE("pooled counts weight frames by persons") {
  const SkeletonDef skel = body13();
  const std::vector<EvalPose> one{body()};
  const std::vector<EvalPose> three{body(0.0), body(1500.0), body(-1500.0)};
  MetricCounts total = count_frame({}, one, skel);
  total.add(count_frame(three, three, skel));
  const MetricReport r = make_report(total, skel);
  CHECK(r.recall500 == doctest::Approx(75.0));
  CHECK(r.ground_truths == 4);
  CHECK(r.matched == 3);
}

TEST_CASE("metric properties on random frames") {
  const SkeletonDef skel = body13();
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 150.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EvalPose> gs, ps;
    for (int k = 0; k < 3; ++k) gs.push_back(body(1500.0 * k));
    for (int k = 0; k < 4; ++k) {
      EvalPose p = gs[k % 3];
      p.score = u(rng);
      const Point3 offset(n(rng) * 2, n(rng) * 2, 0);
      for (auto& j : p.joints) *j += offset + Point3(n(rng), n(rng), n(rng));
      ps.push_back(p);
    }
    const MetricReport r = make_report(count_frame(ps, gs, skel), skel);
    CHECK(r.recall100 <= r.recall500);
    CHECK(r.pck100 <= r.pck500);
    CHECK(r.f1 == doctest::Approx(f1_score(r.invalid_pct, r.recall500)));
    for (double v : {r.pcp, r.pck100, r.pck500, r.recall100, r.recall500, r.invalid_pct, r.f1}) {
      CHECK(v >= 0.0);
      CHECK(v <= 100.0);
    }

    // A rigid motion of everything changes nothing.
    const Eigen::Matrix3d R = Eigen::AngleAxisd(u(rng) * 6.0, Eigen::Vector3d(u(rng), u(rng), 1).normalized()).toRotationMatrix();
    const Point3 t(u(rng) * 1000, u(rng) * 1000, u(rng) * 1000);
    auto moved = [&](std::vector<EvalPose> v) {
      for (auto& e : v) {
        for (auto& j : e.joints) *j = R * *j + t;
      }
      return v;
    };
    const MetricReport r2 = make_report(count_frame(moved(ps), moved(gs), skel), skel);
    CHECK(r2.pcp == doctest::Approx(r.pcp));
    CHECK(r2.mpjpe_mm == doctest::Approx(r.mpjpe_mm));
    CHECK(r2.recall100 == doctest::Approx(r.recall100));
    CHECK(r2.invalid_pct == doctest::Approx(r.invalid_pct));
  }
}

TEST_CASE("whole-body reports per-group errors") {
  const SkeletonDef skel = wholebody133();
  EvalPose gt;
  for (JointId j = 0; j < skel.joint_count(); ++j) gt.joints.emplace_back(Point3(j * 10.0, 0, 1000));
  EvalPose p = gt;
  for (JointId j = 0; j < skel.joint_count(); ++j) {
    const double e = skel.groups[j] == JointGroup::Face ? 10.0 : skel.groups[j] == JointGroup::Hand ? 20.0 : 30.0;
    *p.joints[j] += Point3(0, e, 0);
  }
  const std::vector<EvalPose> ps{p}, gs{gt};
  const MetricReport r = make_report(count_frame(ps, gs, skel), skel);
  REQUIRE(r.mpjpe_groups.size() == 4);
  CHECK(r.mpjpe_groups[0].first == "all");
  CHECK(r.mpjpe_groups[0].second == doctest::Approx((23 * 30.0 + 68 * 10.0 + 42 * 20.0) / 133.0));
  CHECK(r.mpjpe_groups[1].second == doctest::Approx(30.0));
  CHECK(r.mpjpe_groups[2].second == doctest::Approx(10.0));
  CHECK(r.mpjpe_groups[3].second == doctest::Approx(20.0));
  // The headline MPJPE uses the 13 evaluated body joints.
  CHECK(r.mpjpe_mm == doctest::Approx(30.0));
  CHECK(report_to_json(r).contains("mpjpe_groups_mm"));
  CHECK(report_table(r).find("hands") != std::string::npos);
}
