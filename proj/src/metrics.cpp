#include "radarsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "radarsr/errors.hpp"

namespace radarsr {

std::vector<double> nn_dists(const PointCloud& a, const PointCloud& b, Dims dims, NnMethod method) {
  if (b.empty()) throw EmptyReference("nn_dists: reference cloud is empty");
  std::vector<double> out;
  out.reserve(a.size());
  if (method == NnMethod::kBruteForce) {
    std::vector<std::array<double, 3>> ref;
    ref.reserve(b.size());
    for (const auto& p : b.points) ref.push_back(coords(p));
    for (const auto& p : a.points) {
      const auto q = coords(p);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& r : ref) best = std::min(best, squared_distance(q, r, dims));
      out.push_back(std::sqrt(best));
    }
  } else {
    const KdTree tree(b, dims);
    for (const auto& p : a.points) out.push_back(std::sqrt(tree.nearest(coords(p)).squared_distance));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw EmptyCloud("median of an empty sequence");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

void require_nonempty(const PointCloud& a, const PointCloud& b, const char* what) {
  if (a.empty() || b.empty()) throw EmptyCloud(std::string(what) + ": both clouds must be nonempty");
}

}  // namespace

double chamfer(const PointCloud& a, const PointCloud& b, Dims dims) {
  require_nonempty(a, b, "chamfer");
  return 0.5 * (mean(nn_dists(a, b, dims)) + mean(nn_dists(b, a, dims)));
}

double mhd(const PointCloud& a, const PointCloud& b, Dims dims) {
  require_nonempty(a, b, "mhd");
  return 0.5 * (median(nn_dists(a, b, dims)) + median(nn_dists(b, a, dims)));
}

double ucd(const PointCloud& lidar, const PointCloud& enhanced, Dims dims) {
  require_nonempty(lidar, enhanced, "ucd");
  return mean(nn_dists(lidar, enhanced, dims));
}

double umhd(const PointCloud& lidar, const PointCloud& enhanced, Dims dims) {
  require_nonempty(lidar, enhanced, "umhd");
  return median(nn_dists(lidar, enhanced, dims));
}

MetricReport evaluate_metrics(const PointCloud& lidar, const PointCloud& enhanced, Dims dims) {
  require_nonempty(lidar, enhanced, "evaluate_metrics");
  const auto forward = nn_dists(lidar, enhanced, dims);
  const auto backward = nn_dists(enhanced, lidar, dims);
  MetricReport r;
  r.dims = dims;
  r.ucd = mean(forward);
  r.umhd = median(forward);
  r.cd = 0.5 * (r.ucd + mean(backward));
  r.mhd = 0.5 * (r.umhd + median(backward));
  return r;
}

void write_metrics_csv(std::ostream& os, const std::vector<NamedReport>& rows) {
  os << "name,dims,CD,MHD,UCD,UMHD\n" << std::setprecision(17);
  for (const auto& [name, r] : rows) {
    os << name << ',' << (r.dims == Dims::k2D ? "2D" : "3D") << ',' << r.cd << ',' << r.mhd << ',' << r.ucd << ','
       << r.umhd << '\n';
  }
}

void print_metrics_table(std::ostream& os, const std::vector<NamedReport>& rows) {
  os << std::left << std::setw(24) << "case" << std::right << std::setw(6) << "dims" << std::setw(10) << "CD"
     << std::setw(10) << "MHD" << std::setw(10) << "UCD" << std::setw(10) << "UMHD" << '\n';
  os << std::fixed << std::setprecision(3);
  for (const auto& [name, r] : rows) {
    os << std::left << std::setw(24) << name << std::right << std::setw(6) << (r.dims == Dims::k2D ? "2D" : "3D")
       << std::setw(10) << r.cd << std::setw(10) << r.mhd << std::setw(10) << r.ucd << std::setw(10) << r.umhd
       << '\n';
  }
  os.unsetf(std::ios::floatfield);
}

}  // namespace radarsr
