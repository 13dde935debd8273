#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "vkf/calib.hpp"
#include "vkf/heatmap2d.hpp"
#include "vkf/skeleton.hpp"

namespace vkf {

struct RoomBounds {
  Point3 min = Point3::Zero();
  Point3 max = Point3::Zero();

  bool valid() const { return (max.array() > min.array()).all() && min.allFinite() && max.allFinite(); }
  bool contains(const Point3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/// Voxel lattice over a room. Voxel (x, y, z) has its center at
/// min + (index + 0.5) * voxel_size.
struct GridGeometry {
  RoomBounds bounds;
  double voxel_size = 50.0;
  int nx = 0, ny = 0, nz = 0;

  static GridGeometry make(const RoomBounds& bounds, double voxel_size);

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  std::size_t linear(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * ny + y) * nx + x;
  }
  std::array<int, 3> unravel(std::size_t index) const;
  Point3 center(int x, int y, int z) const;
  Point3 center(std::size_t index) const;
  /// Voxel containing a point, or false when outside the lattice.
  bool locate(const Point3& p, std::array<int, 3>& xyz) const;

  bool operator==(const GridGeometry& other) const;
};

/// Per-joint score field; layout joint-major, then z, y, x.
struct VoxelGrid {
  GridGeometry geometry;
  int joints = 0;
  std::vector<float> scores;

  VoxelGrid() = default;
  VoxelGrid(const GridGeometry& g, int joint_count);

  float at(int joint, std::size_t voxel) const {
    return scores[static_cast<std::size_t>(joint) * geometry.voxel_count() + voxel];
  }
  float& at(int joint, std::size_t voxel) {
    return scores[static_cast<std::size_t>(joint) * geometry.voxel_count() + voxel];
  }
  std::span<const float> joint_field(int joint) const {
    return {scores.data() + static_cast<std::size_t>(joint) * geometry.voxel_count(),
            geometry.voxel_count()};
  }
};

struct GridConfig {
  RoomBounds bounds{Point3(-2500.0, -2500.0, 0.0), Point3(2500.0, 2500.0, 2200.0)};
  double voxel_size = 50.0;
  double peak_threshold = 0.25;
  int max_proposals = 10;
  /// Divide by the number of views that see each voxel instead of all views.
  bool normalize_visible = false;
  /// Worker threads for the projection; 0 picks the hardware concurrency.
  int threads = 1;
};

struct Proposal {
  JointId joint = 0;
  Point3 position = Point3::Zero();
  float score = 0.0f;
  std::size_t voxel = 0;
};

/// One calibrated view with its rendered heatmaps.
struct ViewHeatmaps {
  const CameraCalib* calib = nullptr;
  const HeatmapStack* heatmaps = nullptr;
};

/// Averages the heatmap beams of all views in every voxel center. Views are
/// accumulated in the given order, so the result is independent of the
/// thread count. Throws std::invalid_argument with fewer than two views or
/// mismatched joint counts.
VoxelGrid project_heatmaps(std::span<const ViewHeatmaps> views, const GridConfig& cfg);

/// Local maxima at or above `threshold`, greedily accepted in descending
/// score with a 26-neighborhood exclusion around each accepted peak, refined
/// to sub-voxel positions. At most `max_proposals` per joint; output grouped
/// by joint, each joint sorted by descending score.
std::vector<Proposal> find_peaks(const VoxelGrid& grid, double threshold, int max_proposals);

/// Score-weighted centroid of the 3x3x3 voxel centers around `voxel`
/// (clipped at the grid border). An all-zero neighborhood yields the voxel
/// center.
Point3 sub_voxel_refine(const VoxelGrid& grid, JointId joint, std::size_t voxel);

struct OccupancyGrid;

/// Zeroes every score in voxels the mask does not mark filled. Throws
/// std::invalid_argument on a geometry mismatch.
VoxelGrid apply_mask(VoxelGrid grid, const OccupancyGrid& mask);

}  // namespace vkf
