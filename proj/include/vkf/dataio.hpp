#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vkf/calib.hpp"
#include "vkf/depthmask.hpp"
#include "vkf/fusion.hpp"
#include "vkf/heatmap2d.hpp"
#include "vkf/persons.hpp"
#include "vkf/skeleton.hpp"

namespace vkf {

inline constexpr int kSchemaVersion = 1;

/// Schema or content error in a dataset/prediction document. `where` is a
/// JSON pointer to the offending element.
class DataError : public std::runtime_error {
 public:
  DataError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

struct CameraDoc {
  CameraCalib calib;
  /// Camera that only provides depth (not used for keypoint fusion).
  bool depth_only = false;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const CameraDoc&) const = default;
};

/// Depth data by reference: a 16-bit millimeter PNG path (relative to the
/// dataset file) or an inline point list in world millimeters.
struct DepthRef {
  std::optional<std::string> image;
  std::optional<std::vector<Point3>> points;

  bool operator==(const DepthRef&) const = default;
};

struct ViewDoc {
  std::string camera;
  std::optional<std::string> image;
  std::optional<std::vector<Detection2D>> detections;
  std::optional<DepthRef> depth;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const ViewDoc&) const = default;
};

/// Ground-truth skeleton; absent joints are invalid.
struct LabelDoc {
  std::vector<std::optional<Point3>> joints;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const LabelDoc&) const = default;
};

struct FrameDoc {
  std::string id;
  double timestamp = 0.0;
  std::vector<ViewDoc> views;
  std::vector<LabelDoc> labels;
  nlohmann::json extra = nlohmann::json::object();

  bool operator==(const FrameDoc&) const = default;
};

/// Timestamped depth capture, attached to frames by pair_depth().
struct DepthCapture {
  std::string camera;
  double timestamp = 0.0;
  DepthRef depth;

  bool operator==(const DepthCapture&) const = default;
};

struct DatasetDoc {
  std::string name;
  std::string skeleton = "body13";
  RoomBounds room;
  std::vector<CameraDoc> cameras;
  std::vector<FrameDoc> frames;
  std::vector<DepthCapture> depth_stream;
  nlohmann::json extra = nlohmann::json::object();

  const CameraDoc* find_camera(const std::string& id) const;
  std::vector<CameraCalib> calibs() const;

  bool operator==(const DatasetDoc& o) const;
};

/// Parses and validates a dataset document; throws DataError.
DatasetDoc dataset_from_json(const nlohmann::json& j);
nlohmann::json dataset_to_json(const DatasetDoc& doc);

DatasetDoc read_dataset(const std::filesystem::path& path);
void write_dataset(const DatasetDoc& doc, const std::filesystem::path& path);

/// Throws DataError describing the first violated invariant.
void validate_dataset(const DatasetDoc& doc);

/// Concatenates datasets with "<name>/" prefixed camera and frame ids and
/// frames sorted by timestamp. A single document is returned unchanged.
/// Throws DataError on an empty list or mismatched skeletons.
DatasetDoc merge_datasets(std::span<const DatasetDoc> docs);

/// Attaches to every frame, per depth camera, the capture nearest in time
/// within `max_dt_s` seconds (earlier capture on ties).
std::vector<FrameDoc> pair_depth(std::vector<FrameDoc> frames,
                                 std::span<const DepthCapture> captures, double max_dt_s);

/// Loads the depth of one view into a DepthFrame; image paths are resolved
/// against `base_dir`.
DepthFrame load_depth(const std::string& camera, const DepthRef& ref,
                      const std::filesystem::path& base_dir);

/// Views with detections of one frame, ready for fuse_frame(). Throws
/// DataError when fewer than two views carry detections.
std::vector<ViewInput> frame_views(const DatasetDoc& doc, const FrameDoc& frame);

// ---------------------------------------------------------------------------
// Predictions

struct FramePrediction {
  std::string frame_id;
  std::vector<Pose3D> poses;
};

struct PredictionsDoc {
  std::string skeleton;
  nlohmann::json config = nlohmann::json::object();
  std::vector<FramePrediction> frames;
};

nlohmann::json predictions_to_json(const PredictionsDoc& doc);
PredictionsDoc predictions_from_json(const nlohmann::json& j);
PredictionsDoc read_predictions(const std::filesystem::path& path);
void write_predictions(const PredictionsDoc& doc, const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace vkf
