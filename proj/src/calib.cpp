#include "vkf/calib.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Geometry>

namespace vkf {

namespace {

constexpr double kRotationTolerance = 1e-6;
constexpr int kUndistortIterations = 50;
constexpr double kUndistortTolerance = 1e-12;

}  // namespace

bool CameraCalib::has_distortion() const {
  for (double c : distortion) {
    if (c != 0.0) return true;
  }
  return false;
}

Point3 CameraCalib::center() const { return -R.transpose() * t; }

void CameraCalib::validate() const {
  const Eigen::Matrix3d should_be_identity = R * R.transpose();
  if (!R.allFinite() ||
      (should_be_identity - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() >
          kRotationTolerance) {
    throw std::invalid_argument("camera '" + camera_id + "': R is not orthonormal");
  }
  if (std::abs(R.determinant() - 1.0) > kRotationTolerance) {
    throw std::invalid_argument("camera '" + camera_id + "': det(R) must be +1");
  }
  if (!(fx() > 0.0) || !(fy() > 0.0)) {
    throw std::invalid_argument("camera '" + camera_id + "': focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("camera '" + camera_id + "': image size must be positive");
  }
  if (!K.allFinite() || !t.allFinite()) {
    throw std::invalid_argument("camera '" + camera_id + "': non-finite parameters");
  }
}

CameraCalib make_camera(std::string id, double fx, double fy, double cx, double cy,
                        const Eigen::Matrix3d& R, const Eigen::Vector3d& t, int width,
                        int height, const std::array<double, 5>& distortion) {
  CameraCalib calib;
  calib.camera_id = std::move(id);
  calib.K << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  calib.R = R;
  calib.t = t;
  calib.width = width;
  calib.height = height;
  calib.distortion = distortion;
  calib.validate();
  return calib;
}

CameraCalib look_at_camera(std::string id, const Point3& eye, const Point3& target,
                           double focal, int width, int height) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ());
  if (right.norm() < 1e-9) right = Eigen::Vector3d::UnitX();
  right.normalize();
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix3d R;
  R.row(0) = right.transpose();
  R.row(1) = down.transpose();
  R.row(2) = forward.transpose();
  return make_camera(std::move(id), focal, focal, 0.5 * width, 0.5 * height, R, -R * eye,
                     width, height);
}

Eigen::Vector2d distort(const CameraCalib& calib, const Eigen::Vector2d& n) {
  const auto& [k1, k2, p1, p2, k3] = calib.distortion;
  const double x = n.x();
  const double y = n.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
  return {x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x),
          y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y};
}

namespace {

Eigen::Matrix2d distort_jacobian(const CameraCalib& calib, const Eigen::Vector2d& n) {
  const auto& [k1, k2, p1, p2, k3] = calib.distortion;
  const double x = n.x();
  const double y = n.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
  const double dradial = k1 + r2 * (2.0 * k2 + 3.0 * r2 * k3);
  Eigen::Matrix2d J;
  J << radial + 2.0 * x * x * dradial + 2.0 * p1 * y + 6.0 * p2 * x,
      2.0 * x * y * dradial + 2.0 * p1 * x + 2.0 * p2 * y,
      2.0 * x * y * dradial + 2.0 * p1 * x + 2.0 * p2 * y,
      radial + 2.0 * y * y * dradial + 6.0 * p1 * y + 2.0 * p2 * x;
  return J;
}

}  // namespace

Eigen::Vector2d undistort(const CameraCalib& calib, const Eigen::Vector2d& distorted) {
  if (!calib.has_distortion()) return distorted;
  Eigen::Vector2d n = distorted;
  Eigen::Vector2d residual = distorted - distort(calib, n);
  for (int i = 0; i < kUndistortIterations; ++i) {
    // Newton step, halved while it does not reduce the residual.
    const Eigen::Matrix2d J = distort_jacobian(calib, n);
    Eigen::Vector2d step = std::abs(J.determinant()) > 1e-12 ? Eigen::Vector2d(J.inverse() * residual) : residual;
    Eigen::Vector2d next = n + step;
    Eigen::Vector2d next_residual = distorted - distort(calib, next);
    for (int h = 0; h < 20 && next_residual.squaredNorm() > residual.squaredNorm(); ++h) {
      step *= 0.5;
      next = n + step;
      next_residual = distorted - distort(calib, next);
    }
    n = next;
    residual = next_residual;
    if (step.squaredNorm() < kUndistortTolerance * kUndistortTolerance) break;
  }
  return n;
}

std::optional<Pixel2> project(const CameraCalib& calib, const Point3& p) {
  const Eigen::Vector3d c = calib.R * p + calib.t;
  if (!(c.z() > 0.0)) return std::nullopt;
  Eigen::Vector2d n(c.x() / c.z(), c.y() / c.z());
  if (calib.has_distortion()) n = distort(calib, n);
  return Pixel2(calib.fx() * n.x() + calib.cx(), calib.fy() * n.y() + calib.cy());
}

Point3 unproject_depth(const CameraCalib& calib, const Pixel2& px, double depth_mm) {
  if (!(depth_mm > 0.0) || !std::isfinite(depth_mm)) {
    throw std::invalid_argument("unproject_depth: depth must be positive");
  }
  Eigen::Vector2d n((px.x() - calib.cx()) / calib.fx(), (px.y() - calib.cy()) / calib.fy());
  n = undistort(calib, n);
  const Eigen::Vector3d c(n.x() * depth_mm, n.y() * depth_mm, depth_mm);
  return calib.R.transpose() * (c - calib.t);
}

Eigen::Vector3d pixel_ray(const CameraCalib& calib, const Pixel2& px) {
  Eigen::Vector2d n((px.x() - calib.cx()) / calib.fx(), (px.y() - calib.cy()) / calib.fy());
  n = undistort(calib, n);
  return (calib.R.transpose() * Eigen::Vector3d(n.x(), n.y(), 1.0)).normalized();
}

CameraCalib transform_camera(const CameraCalib& calib, const Eigen::Matrix3d& rotation,
                             const Eigen::Vector3d& translation) {
  // X_cam = R x + t = R Q^T (x' - s) + t for x' = Q x + s.
  CameraCalib out = calib;
  out.R = calib.R * rotation.transpose();
  out.t = calib.t - out.R * translation;
  return out;
}

}  // namespace vkf
