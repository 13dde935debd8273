#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vkf/calib.hpp"
#include "vkf/fusion.hpp"

namespace vkf {

/// Depth in millimeters per pixel; 0 marks an invalid pixel.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> depth_mm;

  std::uint16_t at(int x, int y) const {
    return depth_mm[static_cast<std::size_t>(y) * width + x];
  }
};

/// Either a depth image from a calibrated (possibly depth-only) camera or a
/// ready point list in world millimeters.
struct DepthFrame {
  std::string view_id;
  std::optional<DepthImage> image;
  std::vector<Point3> points;
};

struct DepthMaskConfig {
  int min_points = 2;
  int dilation = 1;
  /// Use every n-th depth pixel in both directions.
  int pixel_stride = 2;
};

struct OccupancyGrid {
  GridGeometry geometry;
  std::vector<std::uint32_t> counts;
  std::vector<std::uint8_t> filled;

  std::size_t filled_count() const;
};

/// World points of one depth frame (image pixels unprojected, or the point
/// list as is).
std::vector<Point3> depth_points(const DepthFrame& frame, std::span<const CameraCalib> calibs,
                                 int pixel_stride);

/// Counts depth points per voxel, marks voxels with at least min_points
/// filled and dilates the filled set by `dilation` 6-connected steps. Throws
/// std::invalid_argument when a depth image has no matching calibration or
/// a calibration's image size differs from its depth image.
OccupancyGrid build_mask(std::span<const DepthFrame> frames, std::span<const CameraCalib> calibs,
                         const GridGeometry& geometry, const DepthMaskConfig& cfg);

/// One 6-connected dilation step per iteration.
void dilate(OccupancyGrid& grid, int steps);

/// Renders a point list into a depth image by keeping the nearest point per
/// pixel (points behind the camera or outside the image are skipped).
DepthImage rasterize_depth(std::span<const Point3> points, const CameraCalib& calib);

}  // namespace vkf
