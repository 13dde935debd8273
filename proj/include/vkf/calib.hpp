#pragma once

#include <array>
#include <optional>
#include <string>

#include <Eigen/Core>

namespace vkf {

/// World coordinates in millimeters.
using Point3 = Eigen::Vector3d;
/// Continuous pixel coordinates; integer values are pixel centers.
using Pixel2 = Eigen::Vector2d;

/// Pinhole camera with Brown-Conrady distortion (k1, k2, p1, p2, k3).
///
/// R and t map world points into the camera frame: X_cam = R * X_world + t.
/// The camera looks down +z, image u grows along +x and v along +y.
struct CameraCalib {
  std::string camera_id;
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  std::array<double, 5> distortion{};
  int width = 0;
  int height = 0;

  double fx() const { return K(0, 0); }
  double fy() const { return K(1, 1); }
  double cx() const { return K(0, 2); }
  double cy() const { return K(1, 2); }

  bool has_distortion() const;
  Point3 center() const;

  bool in_image(const Pixel2& px) const {
    return px.x() >= 0.0 && px.y() >= 0.0 && px.x() < width && px.y() < height;
  }

  /// Throws std::invalid_argument when R is not a rotation, focal lengths
  /// are not positive or the image size is empty.
  void validate() const;

  bool operator==(const CameraCalib&) const = default;
};

/// Builds a camera from intrinsics and a world->camera pose; validates it.
CameraCalib make_camera(std::string id, double fx, double fy, double cx, double cy,
                        const Eigen::Matrix3d& R, const Eigen::Vector3d& t, int width,
                        int height, const std::array<double, 5>& distortion = {});

/// Camera at `eye` looking at `target` with world +z as up.
CameraCalib look_at_camera(std::string id, const Point3& eye, const Point3& target,
                           double focal, int width, int height);

/// Pixel of a world point, or nullopt when the point is not in front of the
/// camera (camera-frame z <= 0).
std::optional<Pixel2> project(const CameraCalib& calib, const Point3& p);

/// Applies lens distortion to normalized image coordinates.
Eigen::Vector2d distort(const CameraCalib& calib, const Eigen::Vector2d& normalized);

/// Inverse of distort() by damped Newton iteration (until the update is below
/// 1e-12 or 50 steps); exact when the camera has no distortion.
Eigen::Vector2d undistort(const CameraCalib& calib, const Eigen::Vector2d& distorted);

/// World point seen at pixel (u, v) with camera-frame depth `depth_mm`.
/// Throws std::invalid_argument for non-positive or non-finite depth.
Point3 unproject_depth(const CameraCalib& calib, const Pixel2& px, double depth_mm);

/// Unit direction (world frame) of the ray through a pixel.
Eigen::Vector3d pixel_ray(const CameraCalib& calib, const Pixel2& px);

/// Same camera seen from a world moved by x -> rotation * x + translation.
CameraCalib transform_camera(const CameraCalib& calib, const Eigen::Matrix3d& rotation,
                             const Eigen::Vector3d& translation);

}  // namespace vkf
