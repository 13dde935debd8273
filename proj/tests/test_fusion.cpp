#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "support.hpp"
#include "vkf/depthmask.hpp"
#include "vkf/fusion.hpp"
#include "vkf/heatmap2d.hpp"
#include "vkf/persons.hpp"
#include "vkf/synthgen.hpp"

using namespace vkf;

namespace {

const RoomBounds kRoom{Point3(-1000.0, -1000.0, 0.0), Point3(1000.0, 1000.0, 2000.0)};

HeatmapStack constant_stack(const CameraCalib& c, int joints, float value, int stride = 4) {
  HeatmapStack h;
  h.image = {c.width, c.height};
  h.stride = stride;
  h.width = (c.width + stride - 1) / stride;
  h.height = (c.height + stride - 1) / stride;
  h.joints = joints;
  h.values.assign(static_cast<std::size_t>(h.width) * h.height * joints, value);
  h.support.assign(joints, CellBox{0, 0, h.width - 1, h.height - 1});
  return h;
}

std::vector<CameraCalib> two_cameras() {
  return {look_at_camera("a", Point3(4000, 0, 1500), Point3(0, 0, 1000), 300, 640, 480),
          look_at_camera("b", Point3(0, 4000, 1500), Point3(0, 0, 1000), 300, 640, 480)};
}

// Bilinear lookup written against the heatmap layout, taps outside read 0.
double bilinear(const HeatmapStack& h, int joint, const Pixel2& px) {
  const double x = px.x() / h.stride, y = px.y() / h.stride;
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  double sum = 0.0;
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      const int xx = x0 + dx, yy = y0 + dy;
      if (xx < 0 || yy < 0 || xx >= h.width || yy >= h.height) continue;
      const double wx = dx ? x - x0 : 1.0 - (x - x0);
      const double wy = dy ? y - y0 : 1.0 - (y - y0);
      sum += wx * wy * h.values[(static_cast<std::size_t>(joint) * h.height + yy) * h.width + xx];
    }
  }
  return sum;
}

VoxelGrid empty_grid(int joints = 1, double voxel = 100.0) {
  return VoxelGrid(GridGeometry::make(kRoom, voxel), joints);
}

}  // namespace

TEST_CASE("grid geometry") {
  const GridGeometry g = GridGeometry::make(kRoom, 50.0);
  CHECK(g.nx == 40);
  CHECK(g.ny == 40);
  CHECK(g.nz == 40);
  CHECK(GridGeometry::make(kRoom, 300.0).nx == 7);
  test::check_close(g.center(0, 0, 0), Point3(-975, -975, 25), 1e-9);
  std::array<int, 3> xyz{};
  REQUIRE(g.locate(Point3(-975, -975, 25), xyz));
  CHECK(xyz == std::array<int, 3>{0, 0, 0});
  CHECK_FALSE(g.locate(Point3(0, 0, 2000.1), xyz));
  CHECK(g.unravel(g.linear(3, 5, 7)) == std::array<int, 3>{3, 5, 7});
  CHECK_THROWS_AS(GridGeometry::make(kRoom, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(GridGeometry::make(RoomBounds{Point3(0, 0, 0), Point3(1, 1, 0)}, 10.0), std::invalid_argument);
}

TEST_CASE("projection averages over all views") {
  const auto cams = two_cameras();
  GridConfig cfg;
  cfg.bounds = kRoom;
  cfg.voxel_size = 100.0;
  const std::size_t center = GridGeometry::make(kRoom, 100.0).linear(10, 10, 10);

  SUBCASE("all-zero heatmaps") {
    const HeatmapStack z0 = constant_stack(cams[0], 2, 0.0f), z1 = constant_stack(cams[1], 2, 0.0f);
    const std::vector<ViewHeatmaps> views{{&cams[0], &z0}, {&cams[1], &z1}};
    const VoxelGrid g = project_heatmaps(views, cfg);
    CHECK(std::all_of(g.scores.begin(), g.scores.end(), [](float s) { return s == 0.0f; }));
  }
  SUBCASE("1.0 in both views") {
    const HeatmapStack a = constant_stack(cams[0], 2, 1.0f), b = constant_stack(cams[1], 2, 1.0f);
    const std::vector<ViewHeatmaps> views{{&cams[0], &a}, {&cams[1], &b}};
    CHECK(project_heatmaps(views, cfg).at(1, center) == doctest::Approx(1.0));
  }
  SUBCASE("1.0 in one of two views") {
    const HeatmapStack a = constant_stack(cams[0], 2, 1.0f), b = constant_stack(cams[1], 2, 0.0f);
    const std::vector<ViewHeatmaps> views{{&cams[0], &a}, {&cams[1], &b}};
    CHECK(project_heatmaps(views, cfg).at(0, center) == doctest::Approx(0.5));
  }
  SUBCASE("fewer than two views") {
    const HeatmapStack a = constant_stack(cams[0], 2, 1.0f);
    const std::vector<ViewHeatmaps> views{{&cams[0], &a}};
    CHECK_THROWS_AS(project_heatmaps(views, cfg), std::invalid_argument);
  }
  SUBCASE("joint count mismatch") {
    const HeatmapStack a = constant_stack(cams[0], 2, 1.0f), b = constant_stack(cams[1], 3, 1.0f);
    const std::vector<ViewHeatmaps> views{{&cams[0], &a}, {&cams[1], &b}};
    CHECK_THROWS_AS(project_heatmaps(views, cfg), std::invalid_argument);
  }
}

TEST_CASE("projection matches a direct evaluation, for any thread count") {
  const SkeletonDef skel = body13();
  const RoomBounds room{Point3(-1500, -1500, 0), Point3(1500, 1500, 2000)};
  const auto rig = make_rig(3, room, RigStyle::Ring, 4, RigOptions{640, 480, "cam", 1000.0});
  const auto scene = make_scene(2, skel, room, 9);
  const auto dets = render_detections(scene, rig, 1.0, 0.1, 9);
  std::vector<HeatmapStack> stacks;
  for (std::size_t v = 0; v < rig.size(); ++v) {
    stacks.push_back(render_heatmaps(dets[v], skel, {640, 480}, {}));
  }
  std::vector<ViewHeatmaps> views;
  for (std::size_t v = 0; v < rig.size(); ++v) views.push_back({&rig[v], &stacks[v]});
  GridConfig cfg;
  cfg.bounds = room;
  cfg.voxel_size = 150.0;
  const VoxelGrid g1 = project_heatmaps(views, cfg);
  const GridGeometry& geo = g1.geometry;
  for (int j = 0; j < skel.joint_count(); j += 4) {
    for (std::size_t v = 0; v < geo.voxel_count(); v += 7) {
      double sum = 0.0;
      for (std::size_t c = 0; c < rig.size(); ++c) {
        const auto px = project(rig[c], geo.center(v));
        if (px) sum += bilinear(stacks[c], j, *px);
      }
      CHECK(g1.at(j, v) == doctest::Approx(sum / rig.size()).epsilon(1e-5));
    }
  }
  for (int threads : {2, 3, 0}) {
    cfg.threads = threads;
    CHECK(project_heatmaps(views, cfg).scores == g1.scores);
  }
  // A view with all-zero heatmaps scales every score by V / (V + 1).
  const CameraCalib extra = look_at_camera("z", Point3(0, 3000, 3000), Point3(0, 0, 1000), 400, 640, 480);
  const HeatmapStack zero = constant_stack(extra, skel.joint_count(), 0.0f);
  views.push_back({&extra, &zero});
  cfg.threads = 1;
  const VoxelGrid g2 = project_heatmaps(views, cfg);
  for (std::size_t i = 0; i < g1.scores.size(); ++i) {
    CHECK(g2.scores[i] == doctest::Approx(g1.scores[i] * 3.0 / 4.0).epsilon(1e-6));
  }
  for (int j = 0; j < skel.joint_count(); ++j) {
    const auto f1 = g1.joint_field(j), f2 = g2.joint_field(j);
    CHECK(std::max_element(f1.begin(), f1.end()) - f1.begin() ==
          std::max_element(f2.begin(), f2.end()) - f2.begin());
  }
}

TEST_CASE("find_peaks basics") {
  VoxelGrid g = empty_grid(2);
  CHECK(find_peaks(g, 0.25, 10).empty());

  const GridGeometry& geo = g.geometry;
  const std::size_t v = geo.linear(4, 5, 6);
  g.at(1, v) = 0.9f;
  auto peaks = find_peaks(g, 0.5, 10);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].joint == 1);
  CHECK(peaks[0].voxel == v);
  CHECK(peaks[0].score == doctest::Approx(0.9));
  test::check_close(peaks[0].position, geo.center(v), 1e-9);

  g.at(1, geo.linear(5, 5, 6)) = 0.8f;
  peaks = find_peaks(g, 0.5, 10);
  REQUIRE(peaks.size() == 1);
  CHECK(peaks[0].voxel == v);

  CHECK_THROWS_AS(find_peaks(g, 0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(find_peaks(g, 1.5, 10), std::invalid_argument);
}

TEST_CASE("find_peaks order, cap and neighborhood exclusion") {
  VoxelGrid g = empty_grid(1);
  const GridGeometry& geo = g.geometry;
  const float scores[] = {0.3f, 0.9f, 0.5f, 0.7f, 0.6f};
  for (int i = 0; i < 5; ++i) g.at(0, geo.linear(2 + 3 * i, 10, 10)) = scores[i];
  // Two diagonal neighbors: only the stronger one survives.
  g.at(0, geo.linear(2, 2, 2)) = 0.4f;
  g.at(0, geo.linear(3, 3, 3)) = 0.45f;

  const auto peaks = find_peaks(g, 0.25, 10);
  std::vector<float> got;
  for (const auto& p : peaks) got.push_back(p.score);
  CHECK(got == std::vector<float>{0.9f, 0.7f, 0.6f, 0.5f, 0.45f, 0.3f});
  CHECK(find_peaks(g, 0.25, 3).size() == 3);
  CHECK(find_peaks(g, 0.55, 10).size() == 3);
  for (const auto& p : peaks) CHECK(p.score >= 0.25f);
}

TEST_CASE("sub-voxel refinement") {
  VoxelGrid g = empty_grid(1);
  const GridGeometry& geo = g.geometry;
  const std::size_t v = geo.linear(8, 8, 8);

  SUBCASE("all-zero neighborhood gives the voxel center") {
    test::check_close(sub_voxel_refine(g, 0, v), geo.center(v), 1e-12);
  }
  SUBCASE("symmetric neighborhood gives the voxel center") {
    g.at(0, v) = 1.0f;
    for (int d : {-1, 1}) {
      g.at(0, geo.linear(8 + d, 8, 8)) = 0.5f;
      g.at(0, geo.linear(8, 8 + d, 8)) = 0.3f;
      g.at(0, geo.linear(8, 8, 8 + d)) = 0.2f;
    }
    test::check_close(sub_voxel_refine(g, 0, v), geo.center(v), 1e-9);
  }
  SUBCASE("a stronger +x neighbor moves the estimate toward +x") {
    g.at(0, v) = 1.0f;
    g.at(0, geo.linear(9, 8, 8)) = 0.6f;
    g.at(0, geo.linear(7, 8, 8)) = 0.2f;
    const Point3 r = sub_voxel_refine(g, 0, v);
    CHECK(r.x() > geo.center(v).x());
    CHECK(r.y() == doctest::Approx(geo.center(v).y()));
  }
  SUBCASE("clamped at the grid corner") {
    const std::size_t corner = geo.linear(0, 0, 0);
    g.at(0, corner) = 1.0f;
    g.at(0, geo.linear(1, 0, 0)) = 1.0f;
    const Point3 r = sub_voxel_refine(g, 0, corner);
    CHECK(r.x() == doctest::Approx(geo.center(corner).x() + 50.0));
  }
}

TEST_CASE("refinement beats the nearest voxel center for point sources") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double sigma = 100.0;
  int better = 0;
  for (int trial = 0; trial < 100; ++trial) {
    VoxelGrid g = empty_grid(1);
    const GridGeometry& geo = g.geometry;
    const Point3 src(-200 + 400 * u(rng), -200 + 400 * u(rng), 800 + 400 * u(rng));
    for (std::size_t v = 0; v < geo.voxel_count(); ++v) {
      g.at(0, v) = static_cast<float>(std::exp(-(geo.center(v) - src).squaredNorm() / (2 * sigma * sigma)));
    }
    const auto peaks = find_peaks(g, 0.25, 1);
    REQUIRE(peaks.size() == 1);
    if ((peaks[0].position - src).norm() < (geo.center(peaks[0].voxel) - src).norm()) ++better;
  }
  CHECK(better >= 80);
}

TEST_CASE("apply_mask") {
  VoxelGrid g = empty_grid(2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (float& s : g.scores) s = u(rng);
  OccupancyGrid mask;
  mask.geometry = g.geometry;
  mask.counts.assign(g.geometry.voxel_count(), 0);

  mask.filled.assign(g.geometry.voxel_count(), 1);
  CHECK(apply_mask(g, mask).scores == g.scores);

  mask.filled.assign(g.geometry.voxel_count(), 0);
  const VoxelGrid zero = apply_mask(g, mask);
  CHECK(std::all_of(zero.scores.begin(), zero.scores.end(), [](float s) { return s == 0.0f; }));

  mask.geometry = GridGeometry::make(kRoom, 50.0);
  CHECK_THROWS_AS(apply_mask(g, mask), std::invalid_argument);
}

TEST_CASE("a mask around one of two persons keeps only that person's peaks") {
  const SkeletonDef skel = body13();
  const RoomBounds room{Point3(-2000, -2000, 0), Point3(2000, 2000, 2200)};
  const auto rig = make_rig(4, room, RigStyle::Ring, 3);
  const auto scene = make_scene(2, skel, room, 3, SceneOptions{0.0, 1500.0, 600.0});
  const auto dets = render_detections(scene, rig, 0.0, 0.0, 3);
  std::vector<HeatmapStack> stacks;
  std::vector<ViewHeatmaps> views;
  for (std::size_t v = 0; v < rig.size(); ++v) {
    stacks.push_back(render_heatmaps(dets[v], skel, {rig[v].width, rig[v].height}, {}));
  }
  for (std::size_t v = 0; v < rig.size(); ++v) views.push_back({&rig[v], &stacks[v]});
  GridConfig cfg;
  cfg.bounds = room;
  cfg.voxel_size = 50.0;
  const VoxelGrid grid = project_heatmaps(views, cfg);

  // Depth points only from the first person.
  const auto depth = render_depth({scene[0]}, skel, rig, 200, 5);
  std::vector<DepthFrame> frames{DepthFrame{"pts", std::nullopt, {}}};
  for (const auto& f : depth) frames[0].points.insert(frames[0].points.end(), f.points.begin(), f.points.end());
  REQUIRE_FALSE(frames[0].points.empty());
  const OccupancyGrid mask = build_mask(frames, {}, grid.geometry, {});

  auto nearest_person = [&](const Point3& p) {
    double best[2] = {1e18, 1e18};
    for (int k = 0; k < 2; ++k) {
      for (const Point3& q : scene[k]) best[k] = std::min(best[k], (q - p).norm());
    }
    return best[0] < best[1] ? 0 : 1;
  };
  const auto before = find_peaks(grid, 0.25, 10);
  const auto after = find_peaks(apply_mask(grid, mask), 0.25, 10);
  CHECK(std::count_if(before.begin(), before.end(), [&](const Proposal& p) { return nearest_person(p.position) == 1; }) > 0);
  REQUIRE_FALSE(after.empty());
  for (const Proposal& p : after) CHECK(nearest_person(p.position) == 0);
  // Every joint of the kept person still has a peak within one voxel diagonal.
  for (JointId j = 0; j < skel.joint_count(); ++j) {
    double best = 1e18;
    for (const Proposal& p : after) {
      if (p.joint == j) best = std::min(best, (p.position - scene[0][j]).norm());
    }
    INFO("joint " << j);
    CHECK(best < 50.0 * std::sqrt(3.0));
  }
}
