#include "vkf/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "vkf/depthmask.hpp"

namespace vkf {

GridGeometry GridGeometry::make(const RoomBounds& bounds, double voxel_size) {
  if (!bounds.valid()) throw std::invalid_argument("room bounds: max must exceed min");
  if (!(voxel_size > 0.0)) throw std::invalid_argument("voxel size must be positive");
  GridGeometry g;
  g.bounds = bounds;
  g.voxel_size = voxel_size;
  const Eigen::Vector3d extent = bounds.max - bounds.min;
  // A tiny slack keeps exact multiples (4000 / 50) from rounding up.
  auto cells = [&](double e) { return std::max(1, static_cast<int>(std::ceil(e / voxel_size - 1e-9))); };
  g.nx = cells(extent.x());
  g.ny = cells(extent.y());
  g.nz = cells(extent.z());
  return g;
}

std::array<int, 3> GridGeometry::unravel(std::size_t index) const {
  const auto x = static_cast<int>(index % nx);
  const auto y = static_cast<int>((index / nx) % ny);
  const auto z = static_cast<int>(index / (static_cast<std::size_t>(nx) * ny));
  return {x, y, z};
}

Point3 GridGeometry::center(int x, int y, int z) const {
  return bounds.min + voxel_size * Eigen::Vector3d(x + 0.5, y + 0.5, z + 0.5);
}

Point3 GridGeometry::center(std::size_t index) const {
  const auto [x, y, z] = unravel(index);
  return center(x, y, z);
}

bool GridGeometry::locate(const Point3& p, std::array<int, 3>& xyz) const {
  const Eigen::Vector3d rel = (p - bounds.min) / voxel_size;
  const int dims[3] = {nx, ny, nz};
  for (int a = 0; a < 3; ++a) {
    if (!std::isfinite(rel[a])) return false;
    const double f = std::floor(rel[a]);
    if (f < 0.0 || f >= dims[a]) return false;
    xyz[a] = static_cast<int>(f);
  }
  return true;
}

bool GridGeometry::operator==(const GridGeometry& other) const {
  return bounds.min == other.bounds.min && bounds.max == other.bounds.max &&
         voxel_size == other.voxel_size && nx == other.nx && ny == other.ny && nz == other.nz;
}

VoxelGrid::VoxelGrid(const GridGeometry& g, int joint_count)
    : geometry(g), joints(joint_count), scores(g.voxel_count() * joint_count, 0.0f) {}

namespace {

// Scores for voxel slices [z_begin, z_end). Each voxel only depends on its
// own center, so the split never changes results.
void project_slab(std::span<const ViewHeatmaps> views, const GridConfig& cfg, VoxelGrid& grid,
                  int z_begin, int z_end) {
  const GridGeometry& g = grid.geometry;
  const int joints = grid.joints;
  const auto view_count = static_cast<float>(views.size());
  std::vector<float> acc(joints);
  for (int z = z_begin; z < z_end; ++z) {
    for (int y = 0; y < g.ny; ++y) {
      for (int x = 0; x < g.nx; ++x) {
        std::fill(acc.begin(), acc.end(), 0.0f);
        int seen_by = 0;
        const Point3 c = g.center(x, y, z);
        for (const auto& view : views) {
          const auto px = project(*view.calib, c);
          if (!px || !view.calib->in_image(*px)) continue;
          ++seen_by;
          const HeatmapStack& heat = *view.heatmaps;
          const double hx = px->x() / heat.stride;
          const double hy = px->y() / heat.stride;
          const int cx = static_cast<int>(std::floor(hx));
          const int cy = static_cast<int>(std::floor(hy));
          for (int j = 0; j < joints; ++j) {
            const CellBox& box = heat.support[j];
            if (box.empty() || cx + 1 < box.x0 || cx > box.x1 || cy + 1 < box.y0 || cy > box.y1) {
              continue;
            }
            acc[j] += heat.sample(j, *px);
          }
        }
        const float divisor = cfg.normalize_visible ? static_cast<float>(seen_by) : view_count;
        if (divisor <= 0.0f) continue;
        const std::size_t voxel = g.linear(x, y, z);
        for (int j = 0; j < joints; ++j) {
          if (acc[j] != 0.0f) grid.at(j, voxel) = std::min(1.0f, acc[j] / divisor);
        }
      }
    }
  }
}

}  // namespace

VoxelGrid project_heatmaps(std::span<const ViewHeatmaps> views, const GridConfig& cfg) {
  if (views.size() < 2) throw std::invalid_argument("fusion needs at least two views");
  const int joints = views.front().heatmaps->joints;
  for (const auto& v : views) {
    if (v.calib == nullptr || v.heatmaps == nullptr) {
      throw std::invalid_argument("fusion: view without calibration or heatmaps");
    }
    if (v.heatmaps->joints != joints) {
      throw std::invalid_argument("fusion: views disagree on the joint count");
    }
  }
  VoxelGrid grid(GridGeometry::make(cfg.bounds, cfg.voxel_size), joints);

  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::clamp(threads, 1, grid.geometry.nz);
  if (threads == 1) {
    project_slab(views, cfg, grid, 0, grid.geometry.nz);
    return grid;
  }
  {
    std::vector<std::jthread> workers;
    const int nz = grid.geometry.nz;
    for (int t = 0; t < threads; ++t) {
      const int z0 = nz * t / threads;
      const int z1 = nz * (t + 1) / threads;
      workers.emplace_back([&, z0, z1] { project_slab(views, cfg, grid, z0, z1); });
    }
  }
  return grid;
}

Point3 sub_voxel_refine(const VoxelGrid& grid, JointId joint, std::size_t voxel) {
  const GridGeometry& g = grid.geometry;
  if (voxel >= g.voxel_count()) throw std::out_of_range("sub_voxel_refine: voxel index");
  const auto [x, y, z] = g.unravel(voxel);
  Eigen::Vector3d weighted = Eigen::Vector3d::Zero();
  double total = 0.0;
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int xx = x + dx, yy = y + dy, zz = z + dz;
        if (xx < 0 || yy < 0 || zz < 0 || xx >= g.nx || yy >= g.ny || zz >= g.nz) continue;
        const double w = grid.at(joint, g.linear(xx, yy, zz));
        if (w <= 0.0) continue;
        weighted += w * g.center(xx, yy, zz);
        total += w;
      }
    }
  }
  if (total <= 0.0) return g.center(x, y, z);
  return weighted / total;
}

std::vector<Proposal> find_peaks(const VoxelGrid& grid, double threshold, int max_proposals) {
  if (!(threshold > 0.0) || threshold > 1.0) {
    throw std::invalid_argument("peak threshold must lie in (0, 1]");
  }
  const GridGeometry& g = grid.geometry;
  std::vector<Proposal> out;
  struct Candidate {
    float score;
    std::size_t voxel;
  };
  std::vector<Candidate> candidates;
  std::vector<std::array<int, 3>> accepted;

  for (int j = 0; j < grid.joints; ++j) {
    const auto field = grid.joint_field(j);
    candidates.clear();
    for (int z = 0; z < g.nz; ++z) {
      for (int y = 0; y < g.ny; ++y) {
        for (int x = 0; x < g.nx; ++x) {
          const std::size_t v = g.linear(x, y, z);
          const float s = field[v];
          if (!(s >= threshold)) continue;
          bool is_max = true;
          for (int dz = -1; dz <= 1 && is_max; ++dz) {
            for (int dy = -1; dy <= 1 && is_max; ++dy) {
              for (int dx = -1; dx <= 1; ++dx) {
                const int xx = x + dx, yy = y + dy, zz = z + dz;
                if (xx < 0 || yy < 0 || zz < 0 || xx >= g.nx || yy >= g.ny || zz >= g.nz) continue;
                if (field[g.linear(xx, yy, zz)] > s) {
                  is_max = false;
                  break;
                }
              }
            }
          }
          if (is_max) candidates.push_back({s, v});
        }
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      return a.score != b.score ? a.score > b.score : a.voxel < b.voxel;
    });

    accepted.clear();
    for (const Candidate& c : candidates) {
      if (static_cast<int>(accepted.size()) >= max_proposals) break;
      const auto xyz = g.unravel(c.voxel);
      const bool suppressed = std::any_of(accepted.begin(), accepted.end(), [&](const auto& a) {
        return std::abs(a[0] - xyz[0]) <= 1 && std::abs(a[1] - xyz[1]) <= 1 &&
               std::abs(a[2] - xyz[2]) <= 1;
      });
      if (suppressed) continue;
      accepted.push_back(xyz);
      out.push_back({j, sub_voxel_refine(grid, j, c.voxel), c.score, c.voxel});
    }
  }
  return out;
}

VoxelGrid apply_mask(VoxelGrid grid, const OccupancyGrid& mask) {
  if (!(grid.geometry == mask.geometry)) {
    throw std::invalid_argument("apply_mask: occupancy grid geometry differs from the voxel grid");
  }
  const std::size_t n = grid.geometry.voxel_count();
  for (int j = 0; j < grid.joints; ++j) {
    for (std::size_t v = 0; v < n; ++v) {
      if (!mask.filled[v]) grid.at(j, v) = 0.0f;
    }
  }
  return grid;
}

}  // namespace vkf
