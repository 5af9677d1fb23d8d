#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "radarsr/pointcloud.hpp"

namespace radarsr {

struct IcpCfg {
  int max_iters = 60;
  double tol = 1e-7;          // stop when the residual changes less than this (meters)
  double voxel_leaf = 0.2;    // source downsampling; <= 0 disables it
  double gate = 1.0;          // initial correspondence distance gate (meters)
  double gate_decay = 0.9;    // gate multiplier per iteration
  double gate_floor = 0.2;
};

struct IcpResult {
  RigidTransform transform;
  /// RMS correspondence distance after each iteration's alignment.
  std::vector<double> residuals;
  bool converged = false;
};

/// Voxel-grid downsampling that keeps, per voxel, the input point nearest
/// the voxel centroid. Output order follows voxel index.
PointCloud voxel_downsample(const PointCloud& cloud, double leaf);

/// Point-to-point ICP estimating T with target ~= T(source).
/// Throws DegenerateGeometry when matched points are collinear or coincident,
/// and EmptyCloud when either cloud has fewer than 3 points.
IcpResult icp(const PointCloud& source, const PointCloud& target, const RigidTransform& init, const IcpCfg& cfg = {});

/// Closed-form least-squares rigid fit mapping src[i] onto dst[i] (Kabsch),
/// always returning a proper rotation.
RigidTransform fit_rigid(const std::vector<Eigen::Vector3d>& src, const std::vector<Eigen::Vector3d>& dst);

/// ||t_est - t_gt|| in meters.
double rte(const RigidTransform& est, const RigidTransform& gt);
/// Geodesic rotation angle between est and gt, in degrees.
double rre(const RigidTransform& est, const RigidTransform& gt);

struct RegistrationThresholds {
  double rte = 0.5;  // meters
  double rre = 5.0;  // degrees
};

struct RegistrationResult {
  RigidTransform estimated;
  RigidTransform ground_truth;
  double rte = 0.0;
  double rre = 0.0;
  bool success = false;
};

RegistrationResult score_registration(const RigidTransform& estimated, const RigidTransform& ground_truth,
                                      const RegistrationThresholds& th = {});

struct RecallSummary {
  double rr = 0.0;
  double rte_success = 0.0, rte_all = 0.0;  // means over successful / all pairs
  double rre_success = 0.0, rre_all = 0.0;
  std::size_t successes = 0;
  std::size_t total = 0;
};

/// Success fraction and mean errors. Means over successes are NaN when
/// nothing succeeded. Throws ValidationError on an empty result list.
RecallSummary registration_recall(const std::vector<RegistrationResult>& results);

/// Index pairs (i, j), i < j, whose pose translations are more than
/// `min_distance` and at most `max_distance` apart.
std::vector<std::pair<std::size_t, std::size_t>> select_pairs(const std::vector<RigidTransform>& poses,
                                                              double min_distance = 1.0, double max_distance = 10.0);

struct PairRecord {
  std::size_t source = 0;
  std::size_t target = 0;
  RegistrationResult result;
};

/// CSV columns: source,target,rte,rre,success.
void write_pair_results_csv(std::ostream& os, const std::vector<PairRecord>& rows);
/// Table with RR(%), RTE(m)[succ./all], RRE(deg)[succ./all] per labeled run.
void print_recall_table(std::ostream& os, const std::vector<std::pair<std::string, RecallSummary>>& rows);

}  // namespace radarsr
