#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "support.hpp"
#include "vkf/dataio.hpp"
#include "vkf/png_io.hpp"
#include "vkf/synthgen.hpp"

using namespace vkf;
using nlohmann::json;

namespace {

DatasetDoc small_dataset(const std::string& name, std::uint64_t seed, int frames = 2) {
  SynthConfig cfg;
  cfg.name = name;
  cfg.frames = frames;
  cfg.persons = 2;
  cfg.cameras = 3;
  cfg.seed = seed;
  cfg.jitter_px = 1.0;
  cfg.dropout = 0.1;
  return make_dataset(cfg);
}

// Expects dataset_from_json to fail with the given pointer.
void check_error_at(const json& j, const std::string& where) {
  try {
    dataset_from_json(j);
    FAIL("no error for " << where);
  } catch (const DataError& e) {
    CHECK(e.where() == where);
  }
}

}  // namespace

TEST_CASE("the checked-in minimal dataset parses and validates") {
  const DatasetDoc doc = read_dataset(std::filesystem::path(VKF_SOURCE_DIR) / "data" / "minimal.json");
  CHECK(doc.name == "minimal");
  CHECK(doc.cameras.size() == 2);
  REQUIRE(doc.frames.size() == 1);
  CHECK(doc.frames[0].labels.size() == 1);
  CHECK(frame_views(doc, doc.frames[0]).size() == 2);
}

TEST_CASE("write then read gives the same document") {
  const auto dir = test::scratch_dir("dataio_roundtrip");
  DatasetDoc doc = small_dataset("rt", 5);
  doc.extra["notes"] = "kept";
  doc.cameras[0].extra["serial"] = 1234;
  doc.cameras[1].depth_only = true;
  doc.frames[0].extra["weather"] = json::array({1, 2});
  doc.frames[0].views[0].extra["exposure"] = 0.5;
  doc.frames[0].views[0].image = "images/f0.jpg";
  doc.frames[0].labels[0].extra["name"] = "alice";
  doc.frames[0].labels[0].joints[3] = std::nullopt;
  doc.frames[1].views[1].depth = DepthRef{"depth/a.png", std::nullopt};
  doc.depth_stream.push_back({doc.cameras[2].calib.camera_id, 0.01, DepthRef{std::nullopt, std::vector<Point3>{{1, 2, 3}}}});

  write_dataset(doc, dir / "d.json");
  const DatasetDoc back = read_dataset(dir / "d.json");
  CHECK(back == doc);
  write_dataset(back, dir / "e.json");
  CHECK(read_json_file(dir / "d.json") == read_json_file(dir / "e.json"));
}

TEST_CASE("schema errors name the offending element") {
  const json base = dataset_to_json(small_dataset("err", 2));

  json j = base;
  j["frames"][1]["views"][0]["camera"] = "nope";
  check_error_at(j, "/frames/1/views/0/camera");

  j = base;
  j.erase("cameras");
  check_error_at(j, "/cameras");

  j = base;
  j["cameras"][1]["K"][0][0] = "x";
  check_error_at(j, "/cameras/1/K/0/0");

  j = base;
  j["frames"][0]["views"][1]["detections"][0]["keypoints"][2] = json::array({1, 2});
  check_error_at(j, "/frames/0/views/1/detections/0/keypoints/2");

  j = base;
  j["frames"][0]["views"][1]["detections"][0]["keypoints"].erase(0);
  check_error_at(j, "/frames/0/views/1/detections/0/keypoints");

  j = base;
  j["frames"][1]["timestamp"] = -1.0;
  check_error_at(j, "/frames/1/timestamp");

  j = base;
  j["frames"][0]["labels"][0]["joints"].erase(0);
  check_error_at(j, "/frames/0/labels/0/joints");

  j = base;
  j["schema"] = 7;
  check_error_at(j, "/schema");

  j = base;
  j["skeleton"] = "h36m";
  check_error_at(j, "/skeleton");

  j = base;
  j["cameras"][1]["id"] = j["cameras"][0]["id"];
  check_error_at(j, "/cameras/1");

  j = base;
  j["cameras"][0]["R"][0][0] = 2.0;
  check_error_at(j, "/cameras/0");

  j = base;
  j["room"]["max"][2] = -1.0;
  check_error_at(j, "/room");
}

TEST_CASE("a person id reused across views of one frame is rejected") {
  json j = dataset_to_json(small_dataset("dup", 3, 1));
  const int id = j["frames"][0]["views"][0]["detections"][0]["person"];
  j["frames"][0]["views"][1]["detections"][0]["person"] = id;
  CHECK_THROWS_AS(dataset_from_json(j), DataError);
}

TEST_CASE("unreadable files raise data errors") {
  const auto dir = test::scratch_dir("dataio_files");
  CHECK_THROWS_AS(read_dataset(dir / "missing.json"), DataError);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK_THROWS_AS(read_dataset(dir / "broken.json"), DataError);
}

TEST_CASE("merging datasets") {
  const DatasetDoc a = small_dataset("a", 1, 2);
  DatasetDoc b = small_dataset("b", 2, 3);
  for (auto& f : b.frames) f.timestamp += 0.01;

  const std::vector<DatasetDoc> docs{a, b};
  const DatasetDoc m = merge_datasets(docs);
  CHECK(m.frames.size() == 5);
  CHECK(m.cameras.size() == 6);
  CHECK(m.frames[0].id == "a/f0");
  CHECK(m.frames[1].id == "b/f0");
  for (std::size_t i = 1; i < m.frames.size(); ++i) CHECK(m.frames[i - 1].timestamp <= m.frames[i].timestamp);
  CHECK(m.find_camera("b/" + b.cameras[0].calib.camera_id) != nullptr);
  validate_dataset(m);
  CHECK(frame_views(m, m.frames[1])[0].calib.camera_id.rfind("b/", 0) == 0);

  const std::vector<DatasetDoc> single{a};
  CHECK(merge_datasets(single) == a);
  CHECK_THROWS_AS(merge_datasets({}), DataError);

  SynthConfig wb;
  wb.skeleton = "coco17";
  const std::vector<DatasetDoc> mixed{a, make_dataset(wb)};
  CHECK_THROWS_AS(merge_datasets(mixed), DataError);
}

TEST_CASE("pairing depth captures with frames") {
  std::vector<FrameDoc> frames(3);
  for (int i = 0; i < 3; ++i) {
    frames[i].id = "f" + std::to_string(i);
    frames[i].timestamp = 0.1 * i;
  }
  auto cap = [](double t, double marker) {
    return DepthCapture{"depth", t, DepthRef{std::nullopt, std::vector<Point3>{{marker, 0, 0}}}};
  };
  // f0: exact; f1: two candidates, the nearer wins; f2: 0.08 s away, too far.
  const std::vector<DepthCapture> caps{cap(0.0, 1), cap(0.07, 2), cap(0.11, 3), cap(0.28, 4)};
  const auto paired = pair_depth(frames, caps, 0.05);
  auto marker = [](const FrameDoc& f) -> double {
    for (const auto& v : f.views) {
      if (v.camera == "depth" && v.depth) return v.depth->points->front().x();
    }
    return -1.0;
  };
  CHECK(marker(paired[0]) == 1.0);
  CHECK(marker(paired[1]) == 3.0);
  CHECK(marker(paired[2]) == -1.0);

  // Equal distance: the earlier capture.
  std::vector<FrameDoc> half(1);
  half[0].timestamp = 0.5;
  const std::vector<DepthCapture> tie{cap(0.75, 6), cap(0.25, 5)};
  CHECK(marker(pair_depth(half, tie, 0.3)[0]) == 5.0);
  CHECK_THROWS_AS(pair_depth(frames, caps, 0.0), std::invalid_argument);
}

TEST_CASE("16-bit PNG round trip and depth loading") {
  const auto dir = test::scratch_dir("dataio_png");
  GrayImage<std::uint16_t> img{7, 5, {}};
  for (int i = 0; i < 35; ++i) img.pixels.push_back(static_cast<std::uint16_t>(i * 1871));
  write_png16(dir / "d.png", img);
  const auto back = read_png16(dir / "d.png");
  CHECK(back.width == 7);
  CHECK(back.height == 5);
  CHECK(back.pixels == img.pixels);

  const DepthFrame f = load_depth("cam", DepthRef{"d.png", std::nullopt}, dir);
  REQUIRE(f.image);
  CHECK(f.image->depth_mm == img.pixels);
  CHECK_THROWS_AS(load_depth("cam", DepthRef{"none.png", std::nullopt}, dir), DataError);
}

TEST_CASE("predictions round trip") {
  PredictionsDoc doc;
  doc.skeleton = "body13";
  doc.config = {{"voxel", 50}};
  Pose3D pose;
  pose.score = 0.75;
  pose.center = Point3(1, 2, 3);
  pose.joints.assign(13, std::nullopt);
  pose.joints[2] = JointEstimate{Point3(10.5, -3.25, 900.0), 0.5, 0};
  doc.frames.push_back({"f0", {pose}});
  doc.frames.push_back({"f1", {}});
  const auto dir = test::scratch_dir("dataio_preds");
  write_predictions(doc, dir / "p.json");
  const PredictionsDoc back = read_predictions(dir / "p.json");
  CHECK(back.skeleton == "body13");
  CHECK(back.config == doc.config);
  REQUIRE(back.frames.size() == 2);
  REQUIRE(back.frames[0].poses.size() == 1);
  CHECK(back.frames[0].poses[0].score == 0.75);
  REQUIRE(back.frames[0].poses[0].joints[2]);
  CHECK(back.frames[0].poses[0].joints[2]->position == pose.joints[2]->position);
  CHECK_FALSE(back.frames[0].poses[0].joints[0]);
  CHECK(predictions_to_json(back) == predictions_to_json(doc));
}

TEST_CASE("frame_views needs two detection views") {
  DatasetDoc doc = small_dataset("fv", 4, 1);
  doc.frames[0].views.resize(1);
  CHECK_THROWS_AS(frame_views(doc, doc.frames[0]), DataError);
}
