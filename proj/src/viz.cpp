#include "vkf/viz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace vkf {

namespace {

constexpr std::array<std::array<int, 3>, 8> kPalette = {{
    {230, 25, 75}, {60, 180, 75}, {0, 130, 200}, {245, 130, 48},
    {145, 30, 180}, {70, 240, 240}, {240, 50, 230}, {128, 128, 0},
}};

std::string rgb(std::size_t person) {
  const auto& c = kPalette[person % kPalette.size()];
  char buf[32];
  std::snprintf(buf, sizeof buf, "rgb(%d,%d,%d)", c[0], c[1], c[2]);
  return buf;
}

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

std::size_t skeleton_edge_count(std::span<const Pose3D> poses, const SkeletonDef& skel) {
  std::size_t edges = 0;
  for (const Pose3D& pose : poses) {
    for (JointId j = 0; j < skel.joint_count(); ++j) {
      const JointId parent = skel.parent_of[j];
      if (parent != j && pose.joints[j] && pose.joints[parent]) ++edges;
    }
  }
  return edges;
}

std::string poses_to_ply(std::span<const Pose3D> poses, const SkeletonDef& skel) {
  std::ostringstream vertices, edges;
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  for (std::size_t p = 0; p < poses.size(); ++p) {
    const Pose3D& pose = poses[p];
    if (static_cast<int>(pose.joints.size()) != skel.joint_count()) {
      throw std::invalid_argument("poses_to_ply: pose does not match skeleton");
    }
    std::vector<long> index(pose.joints.size(), -1);
    const auto& c = kPalette[p % kPalette.size()];
    for (JointId j = 0; j < skel.joint_count(); ++j) {
      if (!pose.joints[j]) continue;
      const Point3& x = pose.joints[j]->position;
      char buf[128];
      std::snprintf(buf, sizeof buf, "%.3f %.3f %.3f %d %d %d\n", x.x(), x.y(), x.z(), c[0], c[1], c[2]);
      vertices << buf;
      index[j] = static_cast<long>(vertex_count++);
    }
    for (JointId j = 0; j < skel.joint_count(); ++j) {
      const JointId parent = skel.parent_of[j];
      if (parent == j || index[j] < 0 || index[parent] < 0) continue;
      edges << index[parent] << ' ' << index[j] << '\n';
      ++edge_count;
    }
  }
  std::ostringstream out;
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << vertex_count << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "element edge " << edge_count << "\n"
      << "property int vertex1\nproperty int vertex2\n"
      << "end_header\n"
      << vertices.str() << edges.str();
  return out.str();
}

std::string overlay_svg(const CameraCalib& calib, std::span<const Detection2D> detections,
                        std::span<const Pose3D> poses, const SkeletonDef& skel) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << calib.width << "\" height=\""
      << calib.height << "\" viewBox=\"0 0 " << calib.width << ' ' << calib.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  char buf[256];
  for (const Detection2D& d : detections) {
    for (const Keypoint2D& k : d.keypoints) {
      if (!k.visible) continue;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"gray\"/>\n", k.u, k.v);
      out << buf;
    }
  }
  for (std::size_t p = 0; p < poses.size(); ++p) {
    const Pose3D& pose = poses[p];
    std::vector<std::optional<Pixel2>> px(pose.joints.size());
    for (std::size_t j = 0; j < pose.joints.size(); ++j) {
      if (pose.joints[j]) px[j] = project(calib, pose.joints[j]->position);
    }
    const std::string color = rgb(p);
    out << "<g stroke=\"" << color << "\" fill=\"" << color << "\" stroke-width=\"2\">\n";
    for (JointId j = 0; j < skel.joint_count() && j < static_cast<int>(px.size()); ++j) {
      const JointId parent = skel.parent_of[j];
      if (parent == j || !px[j] || !px[parent]) continue;
      std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n",
                    px[parent]->x(), px[parent]->y(), px[j]->x(), px[j]->y());
      out << buf;
    }
    for (const auto& q : px) {
      if (!q) continue;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2\"/>\n", q->x(), q->y());
      out << buf;
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

GrayImage<std::uint8_t> grid_slice(const VoxelGrid& grid, double z_mm) {
  const GridGeometry& g = grid.geometry;
  const int z = static_cast<int>(std::floor((z_mm - g.bounds.min.z()) / g.voxel_size));
  if (z < 0 || z >= g.nz) throw std::invalid_argument("grid_slice: height outside the grid");
  GrayImage<std::uint8_t> img{g.nx, g.ny, std::vector<std::uint8_t>(static_cast<std::size_t>(g.nx) * g.ny)};
  for (int y = 0; y < g.ny; ++y) {
    for (int x = 0; x < g.nx; ++x) {
      float best = 0.0f;
      for (int j = 0; j < grid.joints; ++j) best = std::max(best, grid.at(j, g.linear(x, y, z)));
      img.pixels[static_cast<std::size_t>(g.ny - 1 - y) * g.nx + x] = to_byte(best);
    }
  }
  return img;
}

GrayImage<std::uint8_t> heatmap_image(const HeatmapStack& heatmaps) {
  GrayImage<std::uint8_t> img{heatmaps.width, heatmaps.height,
                              std::vector<std::uint8_t>(static_cast<std::size_t>(heatmaps.width) * heatmaps.height)};
  for (int j = 0; j < heatmaps.joints; ++j) {
    const auto field = heatmaps.joint_image(j);
    for (std::size_t i = 0; i < field.size(); ++i) img.pixels[i] = std::max(img.pixels[i], to_byte(field[i]));
  }
  return img;
}

GrayImage<std::uint8_t> id_image(const IdImageStack& ids) {
  GrayImage<std::uint8_t> img{ids.width, ids.height,
                              std::vector<std::uint8_t>(static_cast<std::size_t>(ids.width) * ids.height)};
  for (int j = 0; j < ids.joints; ++j) {
    for (int y = 0; y < ids.height; ++y) {
      for (int x = 0; x < ids.width; ++x) {
        const std::int32_t id = ids.at(j, x, y);
        if (id != 0) {
          img.pixels[static_cast<std::size_t>(y) * ids.width + x] =
              static_cast<std::uint8_t>(1 + (static_cast<std::uint32_t>(id) * 53u) % 255u);
        }
      }
    }
  }
  return img;
}

}  // namespace vkf
