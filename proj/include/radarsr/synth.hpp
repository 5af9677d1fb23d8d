#pragma once

#include <cstdint>
#include <vector>

#include "radarsr/kv_config.hpp"
#include "radarsr/pointcloud.hpp"

namespace radarsr {

struct SceneSpec {
  std::uint64_t seed = 0;
  double x_min = -15.0, x_max = 15.0;
  double y_min = 0.0, y_max = 30.0;
  double ground_z = -0.6;
  double top_z = 1.7;  // no object rises above this
  int boxes = 6;
  int walls = 2;
  int cylinders = 4;
  double lattice = 0.05;         // object surface sampling pitch (meters)
  double ground_spacing = 0.2;   // ground sampling pitch (meters)
  bool include_ground = true;
  double lidar_noise_std = 0.0;  // meters
  double p_keep = 0.01;          // radar keep probability per object point
  int ghost_count = 30;
  double ghost_spread = 0.0;     // ghosts may fall this far outside the extent
  double noise_std = 0.1;        // radar jitter (meters)

  /// Throws ValidationError for p_keep outside (0, 1], negative counts, etc.
  void validate() const;
  KeyValueConfig to_config() const;
  static SceneSpec from_config(const KeyValueConfig& cfg, const std::string& prefix = "");
};

struct Box {
  double cx, cy, sx, sy, yaw_deg, height;
};
struct Wall {
  double x0, y0, x1, y1, height;
};
struct Cylinder {
  double cx, cy, radius, height;
};

struct SceneLayout {
  double ground_z = 0.0;
  bool has_ground = false;
  std::vector<Box> boxes;
  std::vector<Wall> walls;
  std::vector<Cylinder> cylinders;

  KeyValueConfig to_config() const;
};

struct ScenePair {
  PointCloud lidar;
  PointCloud radar;
  SceneLayout layout;
};

/// Noise-free lattice samples of every surface in the layout (ground first
/// when present). `object_begin` receives the index of the first non-ground point.
PointCloud sample_surfaces(const SceneLayout& layout, double lattice, double ground_spacing,
                           double x_min, double x_max, double y_min, double y_max,
                           std::size_t* object_begin = nullptr);

/// Dense LiDAR-like cloud of a random layout plus a sparse radar-like cloud:
/// a p_keep subsample of the object points, jittered, with uniform ghosts.
ScenePair generate_scene(const SceneSpec& spec);

struct TrajectoryFrame {
  PointCloud lidar;  // sensor frame
  PointCloud radar;  // sensor frame
  RigidTransform pose;  // sensor -> world
};

struct Trajectory {
  SceneLayout layout;
  PointCloud scene;  // world-frame noise-free LiDAR surface
  std::vector<TrajectoryFrame> frames;
};

/// Static scene observed from poses advancing `step` meters along +y per
/// frame with a small random yaw. Frame 0 sits at the origin.
Trajectory generate_trajectory(const SceneSpec& spec, int n_frames, double step, double yaw_jitter_deg = 2.0);

}  // namespace radarsr
