#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "vkf/dataio.hpp"
#include "vkf/depthmask.hpp"
#include "vkf/metrics.hpp"
#include "vkf/persons.hpp"

namespace vkf {

struct DepthOptions {
  bool enabled = false;
  DepthMaskConfig mask;
  /// Largest time gap when pairing a depth stream with frames.
  double max_dt_s = 0.05;
};

/// Everything that influences the poses of a dataset run.
struct RunConfig {
  FusionConfig fusion;
  /// Voxel room; the dataset room when unset.
  std::optional<RoomBounds> bounds;
  DepthOptions depth;
  /// Use only the first k detection cameras of the dataset (0 = all).
  int cameras = 0;
};

/// Throws std::invalid_argument naming the first out-of-range setting.
void validate_run_config(const RunConfig& cfg);

nlohmann::json run_config_to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; throws DataError on malformed values.
RunConfig run_config_from_json(const nlohmann::json& j);

/// Fusion settings with the voxel room resolved against the dataset.
FusionConfig effective_fusion(const RunConfig& cfg, const DatasetDoc& doc);

struct FrameInputs {
  std::vector<ViewInput> views;
  std::optional<OccupancyGrid> mask;
};

/// Detection views of one frame (camera subset applied) and, with depth
/// enabled, the occupancy mask built from the frame's depth views.
FrameInputs prepare_frame(const DatasetDoc& doc, const FrameDoc& frame, const RunConfig& cfg,
                          const FusionConfig& fusion, const std::filesystem::path& base_dir);

struct DatasetRun {
  PredictionsDoc predictions;
  std::vector<StageTimings> timings;
  std::vector<double> mask_ms;
};

/// Fuses every frame. Frames run on up to `jobs` threads; the output keeps
/// dataset frame order. The effective configuration is embedded in the
/// predictions. The first failing frame (in frame order) rethrows.
DatasetRun fuse_dataset(const DatasetDoc& doc, const std::filesystem::path& base_dir,
                        const RunConfig& cfg, int jobs = 1);

/// Pooled metrics over the dataset's labeled frames; frames without a
/// prediction entry count as empty predictions. Throws DataError for a
/// skeleton mismatch or predictions of unknown frames.
MetricReport evaluate(const PredictionsDoc& predictions, const DatasetDoc& doc);

}  // namespace vkf
