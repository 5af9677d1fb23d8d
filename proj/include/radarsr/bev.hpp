#pragma once

#include <Eigen/Core>

#include "radarsr/kv_config.hpp"
#include "radarsr/pointcloud.hpp"

namespace radarsr {

/// Row-major pixel array, rows = image height.
using Image = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Geometry of a bird's-eye-view raster. Row 0 is the far edge (y_max),
/// column 0 is x_min.
struct BevGrid {
  int width = 256;
  int height = 256;
  double x_min = -15.0, x_max = 15.0;
  double y_min = 0.0, y_max = 30.0;
  double z_min = -0.8, z_max = 1.7;
  double gamma = -0.8;  // height threshold subtracted before normalization

  double cell_x() const { return (x_max - x_min) / width; }
  double cell_y() const { return (y_max - y_min) / height; }
  double range_z() const { return z_max - z_min; }
  /// Throws ValidationError on empty or inverted ranges.
  void validate() const;

  KeyValueConfig to_config() const;
  static BevGrid from_config(const KeyValueConfig& cfg, const std::string& prefix = "");
  bool operator==(const BevGrid&) const = default;
};

struct BevImage {
  BevGrid grid;
  Image pixels;  // values in [0, 1]

  static BevImage zeros(const BevGrid& grid);
};

/// Per pixel: max(z_top - gamma, 0) / range_z, where z_top is the highest
/// in-range point in the cell. Empty cells are 0.
BevImage rasterize(const PointCloud& cloud, const BevGrid& grid);

/// Default back-projection threshold: pixels that export to a nonzero 8-bit
/// value emit a point.
inline constexpr double kBackProjectThreshold = 0.5 / 255.0;

/// One point per pixel above `threshold`, at the pixel center with
/// z = value * range_z + gamma.
PointCloud back_project(const BevImage& img, double threshold = kBackProjectThreshold);

struct Masks {
  Image target;  // 1 where pixel > 0
  Image blank;   // 1 - target
};

Masks mask_of(const Image& img);
inline Masks mask_of(const BevImage& img) { return mask_of(img.pixels); }

}  // namespace radarsr
