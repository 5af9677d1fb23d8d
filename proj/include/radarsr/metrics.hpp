#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "radarsr/kdtree.hpp"
#include "radarsr/pointcloud.hpp"

namespace radarsr {

enum class NnMethod { kBruteForce, kKdTree };

/// Distance from every point of `a` to its nearest neighbor in `b`.
/// Throws EmptyReference when `b` is empty.
std::vector<double> nn_dists(const PointCloud& a, const PointCloud& b, Dims dims,
                             NnMethod method = NnMethod::kKdTree);

/// Median; even counts average the two middle values. Throws on empty input.
double median(std::vector<double> values);

/// Symmetric Chamfer distance: (mean(a->b) + mean(b->a)) / 2.
double chamfer(const PointCloud& a, const PointCloud& b, Dims dims);
/// Modified Hausdorff distance: (median(a->b) + median(b->a)) / 2.
double mhd(const PointCloud& a, const PointCloud& b, Dims dims);
/// Unidirectional Chamfer, LiDAR -> enhanced only.
double ucd(const PointCloud& lidar, const PointCloud& enhanced, Dims dims);
/// Unidirectional modified Hausdorff, LiDAR -> enhanced only.
double umhd(const PointCloud& lidar, const PointCloud& enhanced, Dims dims);

struct MetricReport {
  double cd = 0.0;
  double mhd = 0.0;
  double ucd = 0.0;
  double umhd = 0.0;
  Dims dims = Dims::k2D;
};

/// All four metrics from two shared nearest-neighbor passes.
MetricReport evaluate_metrics(const PointCloud& lidar, const PointCloud& enhanced, Dims dims);

struct NamedReport {
  std::string name;
  MetricReport report;
};

/// CSV columns: name,dims,CD,MHD,UCD,UMHD.
void write_metrics_csv(std::ostream& os, const std::vector<NamedReport>& rows);
/// Fixed-width table in the same column order.
void print_metrics_table(std::ostream& os, const std::vector<NamedReport>& rows);

}  // namespace radarsr
