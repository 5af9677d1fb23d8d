#include "radarsr/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "radarsr/errors.hpp"

namespace radarsr {

bool PointCloud::has_intensity() const {
  return std::all_of(points.begin(), points.end(),
                     [](const Point3& p) { return p.intensity.has_value(); });
}

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  const double ortho_err = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho_err <= 1e-9) || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw ValidationError("rotation is not a proper orthonormal matrix");
  }
  if (!translation.allFinite()) throw ValidationError("translation is not finite");
}

RigidTransform RigidTransform::from_euler_deg(double yaw, double pitch, double roll,
                                              const Eigen::Vector3d& translation) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const Eigen::Matrix3d R = (Eigen::AngleAxisd(yaw * kDeg, Eigen::Vector3d::UnitZ()) *
                             Eigen::AngleAxisd(pitch * kDeg, Eigen::Vector3d::UnitY()) *
                             Eigen::AngleAxisd(roll * kDeg, Eigen::Vector3d::UnitX()))
                                .toRotationMatrix();
  return {R, translation};
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation_ = rotation_.transpose();
  out.translation_ = -(out.rotation_ * translation_);
  return out;
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  RigidTransform out;
  out.rotation_ = rotation_ * other.rotation_;
  out.translation_ = rotation_ * other.translation_ + translation_;
  return out;
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

PointCloud transform(const PointCloud& cloud, const RigidTransform& T) {
  PointCloud out;
  out.frame_id = cloud.frame_id;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    const Eigen::Vector3d q = T.apply(p.position());
    out.points.push_back({q.x(), q.y(), q.z(), p.intensity});
  }
  return out;
}

namespace {

struct Plane {
  Eigen::Vector3d normal;  // unit, normal.z() >= 0
  double offset = 0.0;     // normal . p + offset = signed height

  double height(const Eigen::Vector3d& p) const { return normal.dot(p) + offset; }
};

std::optional<Plane> plane_through(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                   const Eigen::Vector3d& c) {
  Eigen::Vector3d n = (b - a).cross(c - a);
  const double len = n.norm();
  if (len < 1e-12) return std::nullopt;
  n /= len;
  if (n.z() < 0) n = -n;
  return Plane{n, -n.dot(a)};
}

// Total least squares refit over the inlier set.
Plane refine(const std::vector<Eigen::Vector3d>& pts) {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) cov += (p - centroid) * (p - centroid).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  Eigen::Vector3d n = es.eigenvectors().col(0);
  if (n.z() < 0) n = -n;
  return Plane{n, -n.dot(centroid)};
}

}  // namespace

PointCloud remove_ground(const PointCloud& cloud, const GroundCfg& cfg) {
  if (cloud.empty()) throw EmptyCloud("remove_ground: cloud is empty");
  if (cfg.iterations < 1 || cfg.inlier_threshold <= 0 || cfg.height_margin < 0) {
    throw ValidationError("remove_ground: invalid configuration");
  }

  const std::size_t n = cloud.size();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const double min_normal_z = std::cos(cfg.max_tilt_deg * std::numbers::pi / 180.0);

  std::optional<Plane> best;
  std::size_t best_support = 0;
  if (n >= 3) {
    for (int it = 0; it < cfg.iterations; ++it) {
      const auto plane = plane_through(cloud.points[pick(rng)].position(), cloud.points[pick(rng)].position(),
                                       cloud.points[pick(rng)].position());
      if (!plane || plane->normal.z() < min_normal_z) continue;
      std::size_t support = 0;
      for (const auto& p : cloud.points) {
        if (std::abs(plane->height(p.position())) <= cfg.inlier_threshold) ++support;
      }
      if (support > best_support) {
        best_support = support;
        best = plane;
      }
    }
  }

  if (!best || static_cast<double>(best_support) < cfg.min_inliers * static_cast<double>(n)) {
    if (cfg.passthrough_on_failure) return cloud;
    throw PlaneFitFailure("remove_ground: best plane supports " + std::to_string(best_support) + " of " +
                          std::to_string(n) + " points");
  }

  std::vector<Eigen::Vector3d> inliers;
  inliers.reserve(best_support);
  for (const auto& p : cloud.points) {
    if (std::abs(best->height(p.position())) <= cfg.inlier_threshold) inliers.push_back(p.position());
  }
  const Plane ground = refine(inliers);

  PointCloud out;
  out.frame_id = cloud.frame_id;
  for (const auto& p : cloud.points) {
    if (ground.height(p.position()) > cfg.height_margin) out.points.push_back(p);
  }
  return out;
}

PointCloud filter_fov(const PointCloud& cloud, double yaw_min_deg, double yaw_max_deg) {
  if (!(yaw_min_deg < yaw_max_deg)) throw ValidationError("filter_fov: yaw_min must be < yaw_max");
  // atan2 of a point placed exactly on a boundary can land one ulp outside it.
  constexpr double kSlack = 1e-9;
  PointCloud out;
  out.frame_id = cloud.frame_id;
  for (const auto& p : cloud.points) {
    const double yaw = std::atan2(p.y, p.x) * 180.0 / std::numbers::pi;
    if (yaw >= yaw_min_deg - kSlack && yaw <= yaw_max_deg + kSlack) out.points.push_back(p);
  }
  return out;
}

PointCloud aggregate(const std::vector<std::pair<PointCloud, RigidTransform>>& frames) {
  if (frames.empty()) throw ValidationError("aggregate: no frames");
  PointCloud out;
  out.frame_id = frames.front().first.frame_id;
  std::size_t total = 0;
  for (const auto& [cloud, pose] : frames) total += cloud.size();
  out.points.reserve(total);
  for (const auto& [cloud, pose] : frames) {
    const PointCloud moved = transform(cloud, pose);
    out.points.insert(out.points.end(), moved.points.begin(), moved.points.end());
  }
  return out;
}

}  // namespace radarsr
