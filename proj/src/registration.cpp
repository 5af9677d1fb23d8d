#include "radarsr/registration.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

#include <Eigen/SVD>

#include "radarsr/errors.hpp"
#include "radarsr/kdtree.hpp"

namespace radarsr {

PointCloud voxel_downsample(const PointCloud& cloud, double leaf) {
  if (leaf <= 0) return cloud;
  struct Acc {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    std::vector<std::size_t> members;
  };
  std::map<std::tuple<long long, long long, long long>, Acc> voxels;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    const auto key = std::make_tuple(static_cast<long long>(std::floor(p.x / leaf)),
                                     static_cast<long long>(std::floor(p.y / leaf)),
                                     static_cast<long long>(std::floor(p.z / leaf)));
    Acc& a = voxels[key];
    a.sum += p.position();
    a.members.push_back(i);
  }
  // Each voxel keeps the member closest to its centroid. An input point
  // survives unchanged, so exact correspondences stay available to ICP.
  PointCloud out;
  out.frame_id = cloud.frame_id;
  out.points.reserve(voxels.size());
  for (const auto& [key, a] : voxels) {
    const Eigen::Vector3d c = a.sum / static_cast<double>(a.members.size());
    std::size_t best = a.members.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i : a.members) {
      const double d = (cloud.points[i].position() - c).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    out.points.push_back(cloud.points[best]);
  }
  return out;
}

RigidTransform fit_rigid(const std::vector<Eigen::Vector3d>& src, const std::vector<Eigen::Vector3d>& dst) {
  if (src.size() != dst.size() || src.size() < 3) throw DegenerateGeometry("fit_rigid: need >= 3 matched pairs");
  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= static_cast<double>(src.size());
  cd /= static_cast<double>(dst.size());
  Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) H += (src[i] - cs) * (dst[i] - cd).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d s = svd.singularValues();
  // Rank 2 (planar) is fine; rank <= 1 leaves a free rotation axis.
  if (!(s[0] > 0) || s[1] <= 1e-12 * s[0]) throw DegenerateGeometry("fit_rigid: cross-covariance is rank deficient");
  const Eigen::Matrix3d U = svd.matrixU();
  const Eigen::Matrix3d V = svd.matrixV();
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  D(2, 2) = (V * U.transpose()).determinant() < 0 ? -1.0 : 1.0;
  Eigen::Matrix3d R = V * D * U.transpose();
  // Re-orthonormalize to keep R^T R = I tight after accumulation.
  Eigen::JacobiSVD<Eigen::Matrix3d> clean(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  R = clean.matrixU() * clean.matrixV().transpose();
  return {R, cd - R * cs};
}

IcpResult icp(const PointCloud& source, const PointCloud& target, const RigidTransform& init, const IcpCfg& cfg) {
  if (source.size() < 3 || target.size() < 3) throw EmptyCloud("icp: both clouds need at least 3 points");
  const PointCloud src = voxel_downsample(source, cfg.voxel_leaf);
  const KdTree tree(target, Dims::k3D);

  IcpResult result;
  result.transform = init;
  double gate = cfg.gate;
  double previous = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Vector3d> from, to;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    from.clear();
    to.clear();
    const double gate2 = gate * gate;
    for (const auto& p : src.points) {
      const Eigen::Vector3d moved = result.transform.apply(p.position());
      const auto hit = tree.nearest({moved.x(), moved.y(), moved.z()});
      if (hit.squared_distance > gate2) continue;
      from.push_back(p.position());
      to.push_back(target.points[hit.index].position());
    }
    if (from.size() < 3) break;
    const RigidTransform candidate = fit_rigid(from, to);
    double sq = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) sq += (candidate.apply(from[i]) - to[i]).squaredNorm();
    const double rms = std::sqrt(sq / static_cast<double>(from.size()));
    if (rms > previous) break;  // keep the better previous estimate
    result.transform = candidate;
    result.residuals.push_back(rms);
    if (previous - rms < cfg.tol) {
      result.converged = true;
      break;
    }
    previous = rms;
    gate = std::max(gate * cfg.gate_decay, cfg.gate_floor);
  }
  return result;
}

double rte(const RigidTransform& est, const RigidTransform& gt) { return (est.translation() - gt.translation()).norm(); }

double rre(const RigidTransform& est, const RigidTransform& gt) {
  // atan2 form of arccos((tr - 1) / 2); it stays accurate near zero.
  const Eigen::Matrix3d R = est.rotation().transpose() * gt.rotation();
  const double c = std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Eigen::Vector3d axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  return std::atan2(0.5 * axis.norm(), c) * 180.0 / std::numbers::pi;
}

RegistrationResult score_registration(const RigidTransform& estimated, const RigidTransform& ground_truth,
                                      const RegistrationThresholds& th) {
  RegistrationResult r{estimated, ground_truth, rte(estimated, ground_truth), rre(estimated, ground_truth), false};
  r.success = r.rre < th.rre && r.rte < th.rte;
  return r;
}

RecallSummary registration_recall(const std::vector<RegistrationResult>& results) {
  if (results.empty()) throw ValidationError("registration_recall: no results");
  RecallSummary s;
  s.total = results.size();
  double rte_ok = 0.0, rre_ok = 0.0;
  for (const auto& r : results) {
    s.rte_all += r.rte;
    s.rre_all += r.rre;
    if (r.success) {
      ++s.successes;
      rte_ok += r.rte;
      rre_ok += r.rre;
    }
  }
  const double n = static_cast<double>(s.total);
  s.rr = static_cast<double>(s.successes) / n;
  s.rte_all /= n;
  s.rre_all /= n;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.rte_success = s.successes ? rte_ok / static_cast<double>(s.successes) : nan;
  s.rre_success = s.successes ? rre_ok / static_cast<double>(s.successes) : nan;
  return s;
}

std::vector<std::pair<std::size_t, std::size_t>> select_pairs(const std::vector<RigidTransform>& poses,
                                                              double min_distance, double max_distance) {
  if (poses.size() < 2) throw ValidationError("select_pairs: need at least two frames");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    for (std::size_t j = i + 1; j < poses.size(); ++j) {
      const double d = (poses[i].translation() - poses[j].translation()).norm();
      if (d > min_distance && d <= max_distance) pairs.emplace_back(i, j);
    }
  }
  return pairs;
}

void write_pair_results_csv(std::ostream& os, const std::vector<PairRecord>& rows) {
  os << "source,target,rte,rre,success\n" << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.source << ',' << r.target << ',' << r.result.rte << ',' << r.result.rre << ',' << (r.result.success ? 1 : 0)
       << '\n';
  }
}

void print_recall_table(std::ostream& os, const std::vector<std::pair<std::string, RecallSummary>>& rows) {
  os << std::left << std::setw(20) << "" << std::right << std::setw(10) << "RR(%)" << std::setw(22)
     << "RTE(m)[succ./all]" << std::setw(24) << "RRE(deg)[succ./all]" << '\n';
  for (const auto& [name, s] : rows) {
    std::ostringstream rte_cell, rre_cell;
    rte_cell << std::fixed << std::setprecision(2) << s.rte_success << '/' << s.rte_all;
    rre_cell << std::fixed << std::setprecision(2) << s.rre_success << '/' << s.rre_all;
    os << std::left << std::setw(20) << name << std::right << std::fixed << std::setprecision(2) << std::setw(10)
       << 100.0 * s.rr << std::setw(22) << rte_cell.str() << std::setw(24) << rre_cell.str() << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

}  // namespace radarsr
