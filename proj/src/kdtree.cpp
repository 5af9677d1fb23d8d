#include "radarsr/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "radarsr/errors.hpp"

namespace radarsr {

KdTree::KdTree(const PointCloud& cloud, Dims dims) : dims_(dims) {
  points_.reserve(cloud.size());
  for (const auto& p : cloud.points) points_.push_back(coords(p));
  std::vector<std::size_t> order(points_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  nodes_.reserve(points_.size());
  root_ = build(order, 0, order.size(), 0);
}

int KdTree::build(std::vector<std::size_t>& order, std::size_t lo, std::size_t hi, int depth) {
  if (lo >= hi) return -1;
  const int axis = depth % static_cast<int>(dims_);
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(lo), order.begin() + static_cast<std::ptrdiff_t>(mid),
                   order.begin() + static_cast<std::ptrdiff_t>(hi), [&](std::size_t a, std::size_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({order[mid], axis, -1, -1});
  const int left = build(order, lo, mid, depth + 1);
  const int right = build(order, mid + 1, hi, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

KdTree::Hit KdTree::nearest(const std::array<double, 3>& query) const {
  if (root_ < 0) throw EmptyReference("nearest neighbor query against an empty cloud");
  Hit best{0, std::numeric_limits<double>::infinity()};
  search(root_, query, best);
  return best;
}

void KdTree::search(int node, const std::array<double, 3>& q, Hit& best) const {
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  const auto& p = points_[n.point];
  const double d2 = squared_distance(q, p, dims_);
  if (d2 < best.squared_distance) best = {n.point, d2};
  const double delta = q[n.axis] - p[n.axis];
  const int near = delta < 0 ? n.left : n.right;
  const int far = delta < 0 ? n.right : n.left;
  if (near >= 0) search(near, q, best);
  if (far >= 0 && delta * delta <= best.squared_distance) search(far, q, best);
}

}  // namespace radarsr
