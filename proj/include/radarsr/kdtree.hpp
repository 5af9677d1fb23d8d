#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "radarsr/pointcloud.hpp"

namespace radarsr {

/// Metric dimensionality: 2 uses (x, y), 3 uses (x, y, z).
enum class Dims { k2D = 2, k3D = 3 };

/// Squared Euclidean distance over the selected dimensions. Both the
/// brute-force and tree paths go through this so results agree bit-for-bit.
inline double squared_distance(const std::array<double, 3>& a, const std::array<double, 3>& b, Dims dims) {
  double s = 0.0;
  for (int d = 0; d < static_cast<int>(dims); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

/// Static k-d tree for exact nearest-neighbor queries.
class KdTree {
 public:
  KdTree(const PointCloud& cloud, Dims dims);

  struct Hit {
    std::size_t index = 0;
    double squared_distance = 0.0;
  };
  /// Throws EmptyReference when the tree is empty.
  Hit nearest(const std::array<double, 3>& query) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::size_t point = 0;  // index into points_
    int axis = 0;
    int left = -1, right = -1;
  };

  int build(std::vector<std::size_t>& order, std::size_t lo, std::size_t hi, int depth);
  void search(int node, const std::array<double, 3>& q, Hit& best) const;

  Dims dims_;
  std::vector<std::array<double, 3>> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

inline std::array<double, 3> coords(const Point3& p) { return {p.x, p.y, p.z}; }

}  // namespace radarsr
