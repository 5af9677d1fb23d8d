#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace radarsr {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  std::optional<double> intensity;

  Eigen::Vector3d position() const { return {x, y, z}; }
  bool operator==(const Point3&) const = default;
};

struct PointCloud {
  std::vector<Point3> points;
  std::string frame_id;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  /// True when every point carries an intensity (vacuously true when empty).
  bool has_intensity() const;
  bool operator==(const PointCloud&) const = default;
};

/// Active rigid transform: p' = rotation * p + translation.
class RigidTransform {
 public:
  RigidTransform() = default;
  /// Throws ValidationError unless rotation is orthonormal with det +1.
  RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static RigidTransform identity() { return {}; }
  /// Z-Y-X Euler angles in degrees (yaw about z applied last).
  static RigidTransform from_euler_deg(double yaw, double pitch, double roll,
                                       const Eigen::Vector3d& translation = Eigen::Vector3d::Zero());

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }
  RigidTransform inverse() const;
  /// (*this * other)(p) == this->apply(other.apply(p)).
  RigidTransform operator*(const RigidTransform& other) const;
  Eigen::Matrix4d matrix() const;

 private:
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

PointCloud transform(const PointCloud& cloud, const RigidTransform& T);

struct GroundCfg {
  int iterations = 200;
  double inlier_threshold = 0.1;  // meters
  double height_margin = 0.2;     // meters
  double min_inliers = 0.1;       // fraction of the cloud
  double max_tilt_deg = 30.0;     // candidate planes steeper than this are skipped
  bool passthrough_on_failure = false;
  std::uint64_t seed = 0;
};

/// Fits a single ground plane by RANSAC and keeps points more than
/// height_margin above it. Throws PlaneFitFailure when the best plane has too
/// little support, unless passthrough_on_failure is set.
PointCloud remove_ground(const PointCloud& cloud, const GroundCfg& cfg = {});

/// Keeps points whose yaw atan2(y, x) lies in [yaw_min, yaw_max] degrees.
PointCloud filter_fov(const PointCloud& cloud, double yaw_min_deg, double yaw_max_deg);

/// Concatenates every frame after moving it into the reference frame.
PointCloud aggregate(const std::vector<std::pair<PointCloud, RigidTransform>>& frames);

}  // namespace radarsr
