#include "radarsr/bev.hpp"

#include <algorithm>
#include <cmath>

#include "radarsr/errors.hpp"

namespace radarsr {

void BevGrid::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("BevGrid: width and height must be positive");
  if (!(x_max > x_min) || !(y_max > y_min) || !(z_max > z_min)) {
    throw ValidationError("BevGrid: each range needs max > min");
  }
  if (!std::isfinite(gamma)) throw ValidationError("BevGrid: gamma must be finite");
}

KeyValueConfig BevGrid::to_config() const {
  KeyValueConfig cfg;
  cfg.set("width", width);
  cfg.set("height", height);
  cfg.set("x_min", x_min);
  cfg.set("x_max", x_max);
  cfg.set("y_min", y_min);
  cfg.set("y_max", y_max);
  cfg.set("z_min", z_min);
  cfg.set("z_max", z_max);
  cfg.set("gamma", gamma);
  return cfg;
}

BevGrid BevGrid::from_config(const KeyValueConfig& cfg, const std::string& prefix) {
  BevGrid g;
  g.width = static_cast<int>(cfg.get_int(prefix + "width", g.width));
  g.height = static_cast<int>(cfg.get_int(prefix + "height", g.height));
  g.x_min = cfg.get_double(prefix + "x_min", g.x_min);
  g.x_max = cfg.get_double(prefix + "x_max", g.x_max);
  g.y_min = cfg.get_double(prefix + "y_min", g.y_min);
  g.y_max = cfg.get_double(prefix + "y_max", g.y_max);
  g.z_min = cfg.get_double(prefix + "z_min", g.z_min);
  g.z_max = cfg.get_double(prefix + "z_max", g.z_max);
  g.gamma = cfg.get_double(prefix + "gamma", g.z_min);
  g.validate();
  return g;
}

BevImage BevImage::zeros(const BevGrid& grid) {
  grid.validate();
  return {grid, Image::Zero(grid.height, grid.width)};
}

BevImage rasterize(const PointCloud& cloud, const BevGrid& grid) {
  BevImage img = BevImage::zeros(grid);
  // Track the top height per cell; NaN marks an empty cell.
  Image top = Image::Constant(grid.height, grid.width, std::numeric_limits<double>::quiet_NaN());
  for (const auto& p : cloud.points) {
    if (p.x < grid.x_min || p.x > grid.x_max || p.y < grid.y_min || p.y > grid.y_max || p.z < grid.z_min ||
        p.z > grid.z_max) {
      continue;
    }
    const int col = std::min(static_cast<int>(std::floor((p.x - grid.x_min) / grid.cell_x())), grid.width - 1);
    const int from_bottom =
        std::min(static_cast<int>(std::floor((p.y - grid.y_min) / grid.cell_y())), grid.height - 1);
    const int row = grid.height - 1 - from_bottom;
    double& t = top(row, col);
    if (std::isnan(t) || p.z > t) t = p.z;
  }
  const double range = grid.range_z();
  for (Eigen::Index r = 0; r < img.pixels.rows(); ++r) {
    for (Eigen::Index c = 0; c < img.pixels.cols(); ++c) {
      const double t = top(r, c);
      if (std::isnan(t)) continue;
      img.pixels(r, c) = std::min(std::max(t - grid.gamma, 0.0) / range, 1.0);
    }
  }
  return img;
}

PointCloud back_project(const BevImage& img, double threshold) {
  const BevGrid& g = img.grid;
  PointCloud out;
  for (Eigen::Index r = 0; r < img.pixels.rows(); ++r) {
    for (Eigen::Index c = 0; c < img.pixels.cols(); ++c) {
      const double v = img.pixels(r, c);
      if (!(v > threshold)) continue;
      const double x = g.x_min + (static_cast<double>(c) + 0.5) * g.cell_x();
      const double y = g.y_max - (static_cast<double>(r) + 0.5) * g.cell_y();
      out.points.push_back({x, y, v * g.range_z() + g.gamma, std::nullopt});
    }
  }
  return out;
}

Masks mask_of(const Image& img) {
  Masks m;
  m.target = (img > 0.0).cast<double>();
  m.blank = 1.0 - m.target;
  return m;
}

}  // namespace radarsr
