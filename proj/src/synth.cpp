#include "radarsr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "radarsr/errors.hpp"

namespace radarsr {

void SceneSpec::validate() const {
  if (!(p_keep > 0.0 && p_keep <= 1.0)) throw ValidationError("scene: p_keep must lie in (0, 1]");
  if (boxes < 0 || walls < 0 || cylinders < 0 || ghost_count < 0) throw ValidationError("scene: counts must be >= 0");
  if (!(x_max > x_min) || !(y_max > y_min) || !(top_z > ground_z)) throw ValidationError("scene: empty extent");
  if (!(lattice > 0) || !(ground_spacing > 0)) throw ValidationError("scene: sampling pitch must be > 0");
  if (noise_std < 0 || lidar_noise_std < 0 || ghost_spread < 0) throw ValidationError("scene: negative noise");
}

KeyValueConfig SceneSpec::to_config() const {
  KeyValueConfig c;
  c.set("seed", static_cast<long long>(seed));
  c.set("x_min", x_min);
  c.set("x_max", x_max);
  c.set("y_min", y_min);
  c.set("y_max", y_max);
  c.set("ground_z", ground_z);
  c.set("top_z", top_z);
  c.set("boxes", boxes);
  c.set("walls", walls);
  c.set("cylinders", cylinders);
  c.set("lattice", lattice);
  c.set("ground_spacing", ground_spacing);
  c.set("include_ground", include_ground);
  c.set("lidar_noise_std", lidar_noise_std);
  c.set("p_keep", p_keep);
  c.set("ghost_count", ghost_count);
  c.set("ghost_spread", ghost_spread);
  c.set("noise_std", noise_std);
  return c;
}

SceneSpec SceneSpec::from_config(const KeyValueConfig& c, const std::string& p) {
  SceneSpec s;
  s.seed = static_cast<std::uint64_t>(c.get_int(p + "seed", static_cast<long long>(s.seed)));
  s.x_min = c.get_double(p + "x_min", s.x_min);
  s.x_max = c.get_double(p + "x_max", s.x_max);
  s.y_min = c.get_double(p + "y_min", s.y_min);
  s.y_max = c.get_double(p + "y_max", s.y_max);
  s.ground_z = c.get_double(p + "ground_z", s.ground_z);
  s.top_z = c.get_double(p + "top_z", s.top_z);
  s.boxes = static_cast<int>(c.get_int(p + "boxes", s.boxes));
  s.walls = static_cast<int>(c.get_int(p + "walls", s.walls));
  s.cylinders = static_cast<int>(c.get_int(p + "cylinders", s.cylinders));
  s.lattice = c.get_double(p + "lattice", s.lattice);
  s.ground_spacing = c.get_double(p + "ground_spacing", s.ground_spacing);
  s.include_ground = c.get_bool(p + "include_ground", s.include_ground);
  s.lidar_noise_std = c.get_double(p + "lidar_noise_std", s.lidar_noise_std);
  s.p_keep = c.get_double(p + "p_keep", s.p_keep);
  s.ghost_count = static_cast<int>(c.get_int(p + "ghost_count", s.ghost_count));
  s.ghost_spread = c.get_double(p + "ghost_spread", s.ghost_spread);
  s.noise_std = c.get_double(p + "noise_std", s.noise_std);
  s.validate();
  return s;
}

KeyValueConfig SceneLayout::to_config() const {
  KeyValueConfig c;
  c.set("ground.present", has_ground);
  c.set("ground.z", ground_z);
  c.set("counts.boxes", static_cast<long long>(boxes.size()));
  c.set("counts.walls", static_cast<long long>(walls.size()));
  c.set("counts.cylinders", static_cast<long long>(cylinders.size()));
  auto join = [](std::initializer_list<double> values) {
    std::string out;
    KeyValueConfig tmp;
    for (double v : values) {
      tmp.set("v", v);
      out += (out.empty() ? "" : ",") + *tmp.raw("v");
    }
    return out;
  };
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Box& b = boxes[i];
    c.set("box" + std::to_string(i) + ".cx_cy_sx_sy_yaw_height", join({b.cx, b.cy, b.sx, b.sy, b.yaw_deg, b.height}));
  }
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const Wall& w = walls[i];
    c.set("wall" + std::to_string(i) + ".x0_y0_x1_y1_height", join({w.x0, w.y0, w.x1, w.y1, w.height}));
  }
  for (std::size_t i = 0; i < cylinders.size(); ++i) {
    const Cylinder& cy = cylinders[i];
    c.set("cylinder" + std::to_string(i) + ".cx_cy_radius_height", join({cy.cx, cy.cy, cy.radius, cy.height}));
  }
  return c;
}

namespace {

// Lattice samples of the parallelogram origin + a*u + b*v, a in [0, len_u], b in [0, len_v].
void sample_rect(const Eigen::Vector3d& origin, const Eigen::Vector3d& u, double len_u, const Eigen::Vector3d& v,
                 double len_v, double pitch, PointCloud& out) {
  const int nu = static_cast<int>(std::floor(len_u / pitch + 1e-9));
  const int nv = static_cast<int>(std::floor(len_v / pitch + 1e-9));
  for (int i = 0; i <= nu; ++i) {
    for (int j = 0; j <= nv; ++j) {
      const Eigen::Vector3d p = origin + (i * pitch) * u + (j * pitch) * v;
      out.points.push_back({p.x(), p.y(), p.z(), std::nullopt});
    }
  }
}

SceneLayout random_layout(const SceneSpec& spec, std::mt19937_64& rng) {
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const double margin = 1.5;
  const double max_h = spec.top_z - spec.ground_z;
  const double min_h = std::min(0.6, max_h);
  SceneLayout layout;
  layout.ground_z = spec.ground_z;
  layout.has_ground = spec.include_ground;
  for (int i = 0; i < spec.boxes; ++i) {
    layout.boxes.push_back({uniform(spec.x_min + margin, spec.x_max - margin),
                            uniform(spec.y_min + margin, spec.y_max - margin), uniform(0.8, 3.0), uniform(0.8, 3.0),
                            uniform(-90.0, 90.0), uniform(min_h, max_h)});
  }
  for (int i = 0; i < spec.walls; ++i) {
    const double x0 = uniform(spec.x_min + margin, spec.x_max - margin);
    const double y0 = uniform(spec.y_min + margin, spec.y_max - margin);
    const double len = uniform(4.0, 10.0);
    const double dir = uniform(0.0, std::numbers::pi);
    const double x1 = std::clamp(x0 + len * std::cos(dir), spec.x_min + margin, spec.x_max - margin);
    const double y1 = std::clamp(y0 + len * std::sin(dir), spec.y_min + margin, spec.y_max - margin);
    layout.walls.push_back({x0, y0, x1, y1, uniform(min_h, max_h)});
  }
  for (int i = 0; i < spec.cylinders; ++i) {
    layout.cylinders.push_back({uniform(spec.x_min + margin, spec.x_max - margin),
                                uniform(spec.y_min + margin, spec.y_max - margin), uniform(0.2, 0.6),
                                uniform(min_h, max_h)});
  }
  return layout;
}

}  // namespace

PointCloud sample_surfaces(const SceneLayout& layout, double lattice, double ground_spacing, double x_min,
                           double x_max, double y_min, double y_max, std::size_t* object_begin) {
  PointCloud out;
  const Eigen::Vector3d ex = Eigen::Vector3d::UnitX(), ey = Eigen::Vector3d::UnitY(), ez = Eigen::Vector3d::UnitZ();
  const double g = layout.ground_z;
  if (layout.has_ground) sample_rect({x_min, y_min, g}, ex, x_max - x_min, ey, y_max - y_min, ground_spacing, out);
  if (object_begin) *object_begin = out.size();

  for (const Box& b : layout.boxes) {
    const double yaw = b.yaw_deg * std::numbers::pi / 180.0;
    const Eigen::Vector3d u(std::cos(yaw), std::sin(yaw), 0.0), v(-std::sin(yaw), std::cos(yaw), 0.0);
    const Eigen::Vector3d corner = Eigen::Vector3d(b.cx, b.cy, g) - 0.5 * b.sx * u - 0.5 * b.sy * v;
    sample_rect(corner, u, b.sx, ez, b.height, lattice, out);
    sample_rect(corner + b.sy * v, u, b.sx, ez, b.height, lattice, out);
    sample_rect(corner, v, b.sy, ez, b.height, lattice, out);
    sample_rect(corner + b.sx * u, v, b.sy, ez, b.height, lattice, out);
    sample_rect(corner + b.height * ez, u, b.sx, v, b.sy, lattice, out);
  }
  for (const Wall& w : layout.walls) {
    const Eigen::Vector3d a(w.x0, w.y0, g), d(w.x1 - w.x0, w.y1 - w.y0, 0.0);
    const double len = d.norm();
    if (len > 0) sample_rect(a, d / len, len, ez, w.height, lattice, out);
  }
  for (const Cylinder& c : layout.cylinders) {
    const int n_around = std::max(8, static_cast<int>(std::ceil(2.0 * std::numbers::pi * c.radius / lattice)));
    const int n_up = static_cast<int>(std::floor(c.height / lattice + 1e-9));
    for (int i = 0; i < n_around; ++i) {
      const double a = 2.0 * std::numbers::pi * i / n_around;
      for (int j = 0; j <= n_up; ++j) {
        out.points.push_back({c.cx + c.radius * std::cos(a), c.cy + c.radius * std::sin(a), g + j * lattice,
                              std::nullopt});
      }
    }
  }
  return out;
}

namespace {

void add_noise(PointCloud& cloud, double std_dev, std::mt19937_64& rng) {
  if (std_dev <= 0) return;
  std::normal_distribution<double> n(0.0, std_dev);
  for (auto& p : cloud.points) {
    p.x += n(rng);
    p.y += n(rng);
    p.z += n(rng);
  }
}

// Bernoulli(p_keep) subsample of cloud[begin:], jittered, plus uniform ghosts.
PointCloud make_radar(const PointCloud& lidar, std::size_t begin, const SceneSpec& spec, std::mt19937_64& rng) {
  PointCloud radar;
  std::bernoulli_distribution keep(spec.p_keep);
  for (std::size_t i = begin; i < lidar.size(); ++i) {
    if (keep(rng)) radar.points.push_back(lidar.points[i]);
  }
  add_noise(radar, spec.noise_std, rng);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  for (int i = 0; i < spec.ghost_count; ++i) {
    radar.points.push_back({uniform(spec.x_min - spec.ghost_spread, spec.x_max + spec.ghost_spread),
                            uniform(spec.y_min - spec.ghost_spread, spec.y_max + spec.ghost_spread),
                            uniform(spec.ground_z, spec.top_z), std::nullopt});
  }
  return radar;
}

}  // namespace

ScenePair generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  ScenePair pair;
  pair.layout = random_layout(spec, rng);
  std::size_t begin = 0;
  pair.lidar = sample_surfaces(pair.layout, spec.lattice, spec.ground_spacing, spec.x_min, spec.x_max, spec.y_min,
                               spec.y_max, &begin);
  add_noise(pair.lidar, spec.lidar_noise_std, rng);
  pair.radar = make_radar(pair.lidar, begin, spec, rng);
  pair.lidar.frame_id = "lidar";
  pair.radar.frame_id = "radar";
  return pair;
}

Trajectory generate_trajectory(const SceneSpec& spec, int n_frames, double step, double yaw_jitter_deg) {
  spec.validate();
  if (n_frames < 1) throw ValidationError("trajectory: n_frames must be >= 1");
  std::mt19937_64 rng(spec.seed);
  SceneSpec world = spec;
  world.y_max = spec.y_max + (n_frames - 1) * step;
  Trajectory traj;
  traj.layout = random_layout(world, rng);
  std::size_t begin = 0;
  traj.scene = sample_surfaces(traj.layout, spec.lattice, spec.ground_spacing, world.x_min, world.x_max, world.y_min,
                               world.y_max, &begin);
  PointCloud objects;
  objects.points.assign(traj.scene.points.begin() + static_cast<std::ptrdiff_t>(begin), traj.scene.points.end());

  std::uniform_real_distribution<double> yaw(-yaw_jitter_deg, yaw_jitter_deg);
  for (int k = 0; k < n_frames; ++k) {
    const double heading = k == 0 ? 0.0 : yaw(rng);
    const RigidTransform pose = RigidTransform::from_euler_deg(heading, 0.0, 0.0, {0.0, k * step, 0.0});
    const RigidTransform to_sensor = pose.inverse();
    TrajectoryFrame f;
    f.pose = pose;
    f.lidar = transform(traj.scene, to_sensor);
    add_noise(f.lidar, spec.lidar_noise_std, rng);
    const PointCloud local_objects = transform(objects, to_sensor);
    f.radar = make_radar(local_objects, 0, spec, rng);
    f.lidar.frame_id = "lidar_" + std::to_string(k);
    f.radar.frame_id = "radar_" + std::to_string(k);
    traj.frames.push_back(std::move(f));
  }
  return traj;
}

}  // namespace radarsr
