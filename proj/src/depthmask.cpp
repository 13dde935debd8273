#include "vkf/depthmask.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vkf {

std::size_t OccupancyGrid::filled_count() const {
  return static_cast<std::size_t>(std::count(filled.begin(), filled.end(), std::uint8_t{1}));
}

std::vector<Point3> depth_points(const DepthFrame& frame, std::span<const CameraCalib> calibs,
                                 int pixel_stride) {
  std::vector<Point3> out = frame.points;
  if (!frame.image) return out;

  const auto it = std::find_if(calibs.begin(), calibs.end(), [&](const CameraCalib& c) {
    return c.camera_id == frame.view_id;
  });
  if (it == calibs.end()) {
    throw std::invalid_argument("depth frame references unknown camera '" + frame.view_id + "'");
  }
  const DepthImage& img = *frame.image;
  if (img.width != it->width || img.height != it->height) {
    throw std::invalid_argument("depth image size differs from camera '" + frame.view_id + "'");
  }
  const int step = std::max(1, pixel_stride);
  for (int y = 0; y < img.height; y += step) {
    for (int x = 0; x < img.width; x += step) {
      const std::uint16_t d = img.at(x, y);
      if (d == 0) continue;
      out.push_back(unproject_depth(*it, Pixel2(x, y), d));
    }
  }
  return out;
}

OccupancyGrid build_mask(std::span<const DepthFrame> frames, std::span<const CameraCalib> calibs,
                         const GridGeometry& geometry, const DepthMaskConfig& cfg) {
  if (cfg.min_points < 1 || cfg.dilation < 0) {
    throw std::invalid_argument("depth mask: min_points >= 1 and dilation >= 0 required");
  }
  OccupancyGrid grid;
  grid.geometry = geometry;
  grid.counts.assign(geometry.voxel_count(), 0);
  grid.filled.assign(geometry.voxel_count(), 0);

  std::array<int, 3> xyz{};
  for (const DepthFrame& frame : frames) {
    for (const Point3& p : depth_points(frame, calibs, cfg.pixel_stride)) {
      if (!geometry.locate(p, xyz)) continue;
      ++grid.counts[geometry.linear(xyz[0], xyz[1], xyz[2])];
    }
  }
  for (std::size_t v = 0; v < grid.counts.size(); ++v) {
    grid.filled[v] = grid.counts[v] >= static_cast<std::uint32_t>(cfg.min_points) ? 1 : 0;
  }
  dilate(grid, cfg.dilation);
  return grid;
}

void dilate(OccupancyGrid& grid, int steps) {
  const GridGeometry& g = grid.geometry;
  std::vector<std::uint8_t> next;
  for (int s = 0; s < steps; ++s) {
    next = grid.filled;
    for (int z = 0; z < g.nz; ++z) {
      for (int y = 0; y < g.ny; ++y) {
        for (int x = 0; x < g.nx; ++x) {
          if (!grid.filled[g.linear(x, y, z)]) continue;
          if (x > 0) next[g.linear(x - 1, y, z)] = 1;
          if (x + 1 < g.nx) next[g.linear(x + 1, y, z)] = 1;
          if (y > 0) next[g.linear(x, y - 1, z)] = 1;
          if (y + 1 < g.ny) next[g.linear(x, y + 1, z)] = 1;
          if (z > 0) next[g.linear(x, y, z - 1)] = 1;
          if (z + 1 < g.nz) next[g.linear(x, y, z + 1)] = 1;
        }
      }
    }
    grid.filled.swap(next);
  }
}

DepthImage rasterize_depth(std::span<const Point3> points, const CameraCalib& calib) {
  DepthImage img;
  img.width = calib.width;
  img.height = calib.height;
  img.depth_mm.assign(static_cast<std::size_t>(img.width) * img.height, 0);
  for (const Point3& p : points) {
    const Eigen::Vector3d c = calib.R * p + calib.t;
    if (!(c.z() >= 1.0) || c.z() > std::numeric_limits<std::uint16_t>::max()) continue;
    const auto px = project(calib, p);
    if (!px) continue;
    const long x = std::lround(px->x());
    const long y = std::lround(px->y());
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
    auto& d = img.depth_mm[static_cast<std::size_t>(y) * img.width + x];
    const auto z = static_cast<std::uint16_t>(std::lround(c.z()));
    if (d == 0 || z < d) d = z;
  }
  return img;
}

}  // namespace vkf
