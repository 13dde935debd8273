#include "vkf/heatmap2d.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace vkf {

namespace {

constexpr double kTruncationSigmas = 3.0;
constexpr double kBoundsMargin = 0.2;

int cells_for(int pixels, int stride) { return (pixels + stride - 1) / stride; }

void check_inputs(std::span<const Detection2D> dets, const SkeletonDef& skel,
                  ImageSize image, const HeatmapConfig& cfg) {
  if (cfg.stride < 1 || !(cfg.sigma_px > 0.0)) {
    throw std::invalid_argument("heatmap config: stride >= 1 and sigma > 0 required");
  }
  if (image.width <= 0 || image.height <= 0) {
    throw std::invalid_argument("heatmap: empty image size");
  }
  std::set<int> seen;
  for (const auto& d : dets) {
    if (d.view_id != dets.front().view_id) {
      throw std::invalid_argument("heatmap: detections from different views mixed");
    }
    if (static_cast<int>(d.keypoints.size()) != skel.joint_count()) {
      throw std::invalid_argument("heatmap: person " + std::to_string(d.person_id) + " has " +
                                  std::to_string(d.keypoints.size()) + " keypoints, skeleton '" +
                                  skel.name + "' has " + std::to_string(skel.joint_count()));
    }
    if (d.person_id <= 0) throw std::invalid_argument("heatmap: person ids must be positive");
    if (!seen.insert(d.person_id).second) {
      throw std::invalid_argument("heatmap: duplicate person id " +
                                  std::to_string(d.person_id));
    }
  }
}

}  // namespace

void CellBox::extend(int x, int y) {
  if (empty()) {
    x0 = x1 = x;
    y0 = y1 = y;
    return;
  }
  x0 = std::min(x0, x);
  x1 = std::max(x1, x);
  y0 = std::min(y0, y);
  y1 = std::max(y1, y);
}

float HeatmapStack::sample(int joint, const Pixel2& px) const {
  const double hx = px.x() / stride;
  const double hy = px.y() / stride;
  const double fx0 = std::floor(hx);
  const double fy0 = std::floor(hy);
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const float ax = static_cast<float>(hx - fx0);
  const float ay = static_cast<float>(hy - fy0);
  auto tap = [&](int x, int y) -> float {
    if (x < 0 || y < 0 || x >= width || y >= height) return 0.0f;
    return at(joint, x, y);
  };
  const float top = tap(x0, y0) * (1.0f - ax) + tap(x0 + 1, y0) * ax;
  const float bottom = tap(x0, y0 + 1) * (1.0f - ax) + tap(x0 + 1, y0 + 1) * ax;
  return top * (1.0f - ay) + bottom * ay;
}

bool within_extended_bounds(const Keypoint2D& kp, ImageSize image) {
  const double mx = kBoundsMargin * image.width;
  const double my = kBoundsMargin * image.height;
  return std::isfinite(kp.u) && std::isfinite(kp.v) && kp.u >= -mx && kp.v >= -my &&
         kp.u <= image.width + mx && kp.v <= image.height + my;
}

RenderedView render_view(std::span<const Detection2D> dets, const SkeletonDef& skel,
                         ImageSize image, const HeatmapConfig& cfg) {
  check_inputs(dets, skel, image, cfg);

  RenderedView out;
  auto& heat = out.heatmaps;
  auto& ids = out.ids;
  heat.image = ids.image = image;
  heat.width = ids.width = cells_for(image.width, cfg.stride);
  heat.height = ids.height = cells_for(image.height, cfg.stride);
  heat.stride = ids.stride = cfg.stride;
  heat.joints = ids.joints = skel.joint_count();
  const std::size_t cells = static_cast<std::size_t>(heat.width) * heat.height * heat.joints;
  heat.values.assign(cells, 0.0f);
  heat.support.assign(heat.joints, CellBox{});
  ids.ids.assign(cells, 0);

  // Ascending id order makes "strictly greater wins" equal to "lower id wins
  // ties", independent of input order.
  std::vector<const Detection2D*> order;
  for (const auto& d : dets) order.push_back(&d);
  std::sort(order.begin(), order.end(),
            [](const Detection2D* a, const Detection2D* b) { return a->person_id < b->person_id; });

  const double sigma = cfg.sigma_px / cfg.stride;
  const double radius = kTruncationSigmas * sigma;
  const double radius_sq = radius * radius;
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);

  for (const Detection2D* det : order) {
    for (JointId j = 0; j < skel.joint_count(); ++j) {
      const Keypoint2D& kp = det->keypoints[j];
      if (!kp.visible || !(kp.confidence > 0.0) || !within_extended_bounds(kp, image)) continue;
      const double peak = cfg.unit_peaks ? 1.0 : std::min(kp.confidence, 1.0);
      const double hx = kp.u / cfg.stride;
      const double hy = kp.v / cfg.stride;
      const int x0 = std::max(0, static_cast<int>(std::ceil(hx - radius)));
      const int x1 = std::min(heat.width - 1, static_cast<int>(std::floor(hx + radius)));
      const int y0 = std::max(0, static_cast<int>(std::ceil(hy - radius)));
      const int y1 = std::min(heat.height - 1, static_cast<int>(std::floor(hy + radius)));
      for (int y = y0; y <= y1; ++y) {
        const double dy = y - hy;
        for (int x = x0; x <= x1; ++x) {
          const double dx = x - hx;
          const double d_sq = dx * dx + dy * dy;
          if (d_sq > radius_sq) continue;
          const auto value = static_cast<float>(peak * std::exp(-d_sq * inv_two_sigma_sq));
          float& cell = heat.at(j, x, y);
          if (value > cell) {
            cell = value;
            ids.at(j, x, y) = det->person_id;
            heat.support[j].extend(x, y);
          }
        }
      }
    }
  }
  return out;
}

HeatmapStack render_heatmaps(std::span<const Detection2D> dets, const SkeletonDef& skel,
                             ImageSize image, const HeatmapConfig& cfg) {
  return render_view(dets, skel, image, cfg).heatmaps;
}

IdImageStack render_id_images(std::span<const Detection2D> dets, const SkeletonDef& skel,
                              ImageSize image, const HeatmapConfig& cfg) {
  return render_view(dets, skel, image, cfg).ids;
}

std::optional<int> sample_id(const IdImageStack& ids, JointId joint, const Pixel2& px) {
  if (joint < 0 || joint >= ids.joints) return std::nullopt;
  if (!(px.x() >= 0.0) || !(px.y() >= 0.0) || !(px.x() < ids.image.width) ||
      !(px.y() < ids.image.height)) {
    return std::nullopt;
  }
  const int x = std::min(ids.width - 1, static_cast<int>(std::lround(px.x() / ids.stride)));
  const int y = std::min(ids.height - 1, static_cast<int>(std::lround(px.y() / ids.stride)));
  const std::int32_t id = ids.at(joint, x, y);
  if (id == 0) return std::nullopt;
  return id;
}

}  // namespace vkf
