#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vkf/calib.hpp"
#include "vkf/skeleton.hpp"

namespace vkf {

struct Keypoint2D {
  double u = 0.0;
  double v = 0.0;
  double confidence = 0.0;
  bool visible = false;

  bool operator==(const Keypoint2D&) const = default;
};

/// One detected person in one view. person_id is unique within a frame
/// across all views.
struct Detection2D {
  std::string view_id;
  int person_id = 0;
  std::vector<Keypoint2D> keypoints;

  bool operator==(const Detection2D&) const = default;
};

struct HeatmapConfig {
  double sigma_px = 6.0;
  int stride = 4;
  /// Render every keypoint with peak 1 instead of its confidence.
  bool unit_peaks = false;
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

/// Inclusive cell rectangle; empty when x1 < x0.
struct CellBox {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
  bool empty() const { return x1 < x0 || y1 < y0; }
  void extend(int x, int y);
};

/// Per-joint score images at 1/stride of the input resolution. Cell (x, y)
/// sits at pixel (x * stride, y * stride).
struct HeatmapStack {
  ImageSize image;
  int width = 0;
  int height = 0;
  int stride = 1;
  int joints = 0;
  std::vector<float> values;
  /// Nonzero support of each joint image.
  std::vector<CellBox> support;

  float at(int joint, int x, int y) const {
    return values[(static_cast<std::size_t>(joint) * height + y) * width + x];
  }
  float& at(int joint, int x, int y) {
    return values[(static_cast<std::size_t>(joint) * height + y) * width + x];
  }
  std::span<const float> joint_image(int joint) const {
    return {values.data() + static_cast<std::size_t>(joint) * width * height,
            static_cast<std::size_t>(width) * height};
  }
  /// Bilinear sample at a pixel position; taps outside the image read 0.
  float sample(int joint, const Pixel2& px) const;
};

/// Per-joint person-id images; 0 means no person.
struct IdImageStack {
  ImageSize image;
  int width = 0;
  int height = 0;
  int stride = 1;
  int joints = 0;
  std::vector<std::int32_t> ids;

  std::int32_t at(int joint, int x, int y) const {
    return ids[(static_cast<std::size_t>(joint) * height + y) * width + x];
  }
  std::int32_t& at(int joint, int x, int y) {
    return ids[(static_cast<std::size_t>(joint) * height + y) * width + x];
  }
};

struct RenderedView {
  HeatmapStack heatmaps;
  IdImageStack ids;
};

/// Renders heatmaps and id images together. Each visible keypoint adds a
/// Gaussian truncated at 3 sigma; persons combine by per-cell maximum and the
/// id image records the owner of that maximum (lower id on exact ties).
/// Throws std::invalid_argument on mixed views, duplicate person ids or
/// keypoint counts that do not match the skeleton.
RenderedView render_view(std::span<const Detection2D> dets, const SkeletonDef& skel,
                         ImageSize image, const HeatmapConfig& cfg);

HeatmapStack render_heatmaps(std::span<const Detection2D> dets, const SkeletonDef& skel,
                             ImageSize image, const HeatmapConfig& cfg);

IdImageStack render_id_images(std::span<const Detection2D> dets, const SkeletonDef& skel,
                              ImageSize image, const HeatmapConfig& cfg);

/// Person id at the cell nearest to `px`, or nullopt when outside the image
/// or on an empty cell.
std::optional<int> sample_id(const IdImageStack& ids, JointId joint, const Pixel2& px);

/// True when a visible keypoint lies within the image extended by 20% on
/// every side.
bool within_extended_bounds(const Keypoint2D& kp, ImageSize image);

}  // namespace vkf
