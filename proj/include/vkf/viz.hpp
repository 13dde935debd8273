#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "vkf/fusion.hpp"
#include "vkf/heatmap2d.hpp"
#include "vkf/persons.hpp"
#include "vkf/png_io.hpp"
#include "vkf/skeleton.hpp"

namespace vkf {

/// ASCII PLY with one colored vertex per present joint and one edge per
/// present joint whose parent is present.
std::string poses_to_ply(std::span<const Pose3D> poses, const SkeletonDef& skel);

/// Number of edges poses_to_ply writes.
std::size_t skeleton_edge_count(std::span<const Pose3D> poses, const SkeletonDef& skel);

/// Image-sized SVG: 2D detections as gray dots, projected poses as colored
/// skeletons.
std::string overlay_svg(const CameraCalib& calib, std::span<const Detection2D> detections,
                        std::span<const Pose3D> poses, const SkeletonDef& skel);

/// Maximum over joints of the voxel layer containing height `z_mm`, scaled
/// to 0..255; row 0 is the largest y. Throws std::invalid_argument when z is
/// outside the grid.
GrayImage<std::uint8_t> grid_slice(const VoxelGrid& grid, double z_mm);

/// Maximum over joints of a heatmap stack, scaled to 0..255.
GrayImage<std::uint8_t> heatmap_image(const HeatmapStack& heatmaps);

/// Owner ids over all joints (later joints win), spread over 1..255.
GrayImage<std::uint8_t> id_image(const IdImageStack& ids);

}  // namespace vkf
