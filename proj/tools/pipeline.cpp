#include "pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "radarsr/checkpoint.hpp"
#include "radarsr/errors.hpp"
#include "radarsr/image_io.hpp"
#include "radarsr/metrics.hpp"
#include "radarsr/pointcloud_io.hpp"
#include "radarsr/score_model.hpp"

namespace radarsr::cli {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

// Runs body(0..n-1) on up to `jobs` threads. The first exception wins and is
// rethrown after every worker has stopped.
template <class Body>
void parallel_for(std::size_t n, int jobs, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(guard);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::size_t count_frames(const fs::path& dir, const std::string& kind, const std::string& ext) {
  std::size_t n = 0;
  while (fs::exists(dir / (frame_name(kind, n) + ext))) ++n;
  return n;
}

struct BevSequence {
  fs::path dir;
  std::size_t frames = 0;
};

BevSequence open_bev_sequence(const fs::path& dir) {
  BevSequence s{dir, count_frames(dir, "lidar", ".bev")};
  if (s.frames == 0) throw ValidationError("no BEV frames (lidar_0000.bev) in '" + dir.string() + "'");
  const std::size_t radar = count_frames(dir, "radar", ".bev");
  if (radar != s.frames) {
    throw ValidationError("'" + dir.string() + "' has " + std::to_string(s.frames) + " LiDAR and " +
                          std::to_string(radar) + " radar BEV frames");
  }
  return s;
}

void copy_poses(const fs::path& from_dir, const fs::path& to_dir) {
  if (fs::exists(from_dir / "poses.txt")) {
    fs::copy_file(from_dir / "poses.txt", to_dir / "poses.txt", fs::copy_options::overwrite_existing);
  }
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

std::string frame_name(const std::string& kind, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "_%04zu", index);
  return kind + buf;
}

std::vector<RigidTransform> read_poses(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot read poses '" + path.string() + "'");
  std::vector<RigidTransform> poses;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Eigen::Matrix3d R;
    Eigen::Vector3d t;
    for (int r = 0; r < 3; ++r) ls >> R(r, 0) >> R(r, 1) >> R(r, 2) >> t[r];
    if (!ls) throw FormatError("poses '" + path.string() + "': expected 12 numbers per line");
    poses.emplace_back(R, t);
  }
  return poses;
}

void write_poses(const fs::path& path, const std::vector<RigidTransform>& poses) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  os << "# 3x4 [R|t] row-major, sensor -> world\n" << std::setprecision(17);
  for (const auto& T : poses) {
    for (int r = 0; r < 3; ++r) {
      os << T.rotation()(r, 0) << ' ' << T.rotation()(r, 1) << ' ' << T.rotation()(r, 2) << ' ' << T.translation()[r]
         << (r < 2 ? ' ' : '\n');
    }
  }
}

KeyValueConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                           const std::string& seed) {
  KeyValueConfig cfg = path.empty() ? KeyValueConfig{} : KeyValueConfig::load(path);
  for (const auto& o : overrides) cfg.apply_override(o);
  if (!seed.empty()) cfg.set("seed", seed);
  return cfg;
}

PipelineConfig PipelineConfig::from(const KeyValueConfig& cfg, int jobs) {
  PipelineConfig pc;
  pc.raw = cfg;
  require(jobs >= 1, "--jobs must be >= 1");
  pc.jobs = jobs;
  const long long seed = cfg.get_int("seed", 0);
  require(seed >= 0, "seed must be >= 0");
  pc.seed = static_cast<std::uint64_t>(seed);

  pc.scene = SceneSpec::from_config(cfg, "scene.");
  pc.synth.sequences = static_cast<int>(cfg.get_int("synth.sequences", pc.synth.sequences));
  pc.synth.frames = static_cast<int>(cfg.get_int("synth.frames", pc.synth.frames));
  pc.synth.step = cfg.get_double("synth.step", pc.synth.step);
  pc.synth.yaw_jitter_deg = cfg.get_double("synth.yaw_jitter_deg", pc.synth.yaw_jitter_deg);
  require(pc.synth.sequences >= 1 && pc.synth.frames >= 1, "synth: sequences and frames must be >= 1");
  require(std::isfinite(pc.synth.step) && pc.synth.yaw_jitter_deg >= 0, "synth: bad step or yaw jitter");

  pc.grid = BevGrid::from_config(cfg, "grid.");
  pc.grid.validate();

  auto& pre = pc.preprocess;
  pre.frames = static_cast<int>(cfg.get_int("preprocess.frames", pre.frames));
  pre.yaw_min_deg = cfg.get_double("preprocess.yaw_min_deg", pre.yaw_min_deg);
  pre.yaw_max_deg = cfg.get_double("preprocess.yaw_max_deg", pre.yaw_max_deg);
  pre.remove_ground = cfg.get_bool("preprocess.remove_ground", pre.remove_ground);
  pre.ground.iterations = static_cast<int>(cfg.get_int("ground.iterations", pre.ground.iterations));
  pre.ground.inlier_threshold = cfg.get_double("ground.inlier_threshold", pre.ground.inlier_threshold);
  pre.ground.height_margin = cfg.get_double("ground.height_margin", pre.ground.height_margin);
  pre.ground.min_inliers = cfg.get_double("ground.min_inliers", pre.ground.min_inliers);
  pre.ground.max_tilt_deg = cfg.get_double("ground.max_tilt_deg", pre.ground.max_tilt_deg);
  pre.ground.passthrough_on_failure = cfg.get_bool("ground.passthrough_on_failure", pre.ground.passthrough_on_failure);
  require(pre.frames >= 1, "preprocess.frames must be >= 1");
  require(pre.yaw_min_deg < pre.yaw_max_deg, "preprocess: yaw_min_deg must be < yaw_max_deg");
  require(pre.ground.iterations >= 1 && pre.ground.inlier_threshold > 0 && pre.ground.height_margin >= 0 &&
              pre.ground.min_inliers >= 0 && pre.ground.min_inliers <= 1,
          "ground: bad RANSAC settings");

  pc.schedule = ScheduleCfg::from_config(cfg, "schedule.");
  const NoiseSchedule sched(pc.schedule);  // validates
  pc.train = TrainConfig::from_config(cfg, "train.");
  pc.train.seed = pc.seed;
  // The network size follows the BEV grid.
  pc.train.arch.height = pc.grid.height;
  pc.train.arch.width = pc.grid.width;
  pc.train.validate(sched);

  pc.enhance.stochastic = cfg.get_bool("enhance.stochastic", pc.enhance.stochastic);
  pc.enhance.threshold = cfg.get_double("enhance.threshold", pc.enhance.threshold);
  require(pc.enhance.threshold >= 0 && pc.enhance.threshold < 1, "enhance.threshold must be in [0, 1)");

  const std::string dims = cfg.get_string("eval.dims", "2D");
  require(dims == "2D" || dims == "3D", "eval.dims must be 2D or 3D");
  pc.eval_dims = dims == "2D" ? Dims::k2D : Dims::k3D;

  auto& reg = pc.reg;
  reg.thresholds.rte = cfg.get_double("register.rte", reg.thresholds.rte);
  reg.thresholds.rre = cfg.get_double("register.rre", reg.thresholds.rre);
  reg.min_distance = cfg.get_double("register.min_distance", reg.min_distance);
  reg.max_distance = cfg.get_double("register.max_distance", reg.max_distance);
  reg.init_translation = cfg.get_double("register.init_translation", reg.init_translation);
  reg.init_rotation_deg = cfg.get_double("register.init_rotation_deg", reg.init_rotation_deg);
  reg.icp.max_iters = static_cast<int>(cfg.get_int("icp.max_iters", reg.icp.max_iters));
  reg.icp.tol = cfg.get_double("icp.tol", reg.icp.tol);
  reg.icp.voxel_leaf = cfg.get_double("icp.voxel_leaf", reg.icp.voxel_leaf);
  reg.icp.gate = cfg.get_double("icp.gate", reg.icp.gate);
  reg.icp.gate_decay = cfg.get_double("icp.gate_decay", reg.icp.gate_decay);
  reg.icp.gate_floor = cfg.get_double("icp.gate_floor", reg.icp.gate_floor);
  require(reg.thresholds.rte > 0 && reg.thresholds.rre > 0, "register: thresholds must be > 0");
  require(reg.min_distance >= 0 && reg.min_distance < reg.max_distance, "register: need 0 <= min_distance < max_distance");
  require(reg.init_translation >= 0 && reg.init_rotation_deg >= 0, "register: init perturbation must be >= 0");
  require(reg.icp.max_iters >= 1 && reg.icp.tol >= 0 && reg.icp.gate > 0 && reg.icp.gate_decay > 0 &&
              reg.icp.gate_decay <= 1 && reg.icp.gate_floor > 0,
          "icp: bad settings");
  return pc;
}

void cmd_synth(const PipelineConfig& pc, const fs::path& out) {
  const auto n = static_cast<std::size_t>(pc.synth.sequences);
  fs::create_directories(out);
  parallel_for(n, pc.jobs, [&](std::size_t s) {
    SceneSpec spec = pc.scene;
    spec.seed = derive_seed(pc.seed, s);
    const Trajectory traj = generate_trajectory(spec, pc.synth.frames, pc.synth.step, pc.synth.yaw_jitter_deg);
    const fs::path dir = out / frame_name("seq", s);
    fs::create_directories(dir);
    std::vector<RigidTransform> poses;
    for (std::size_t f = 0; f < traj.frames.size(); ++f) {
      save_cloud(dir / (frame_name("lidar", f) + ".pcb"), traj.frames[f].lidar);
      save_cloud(dir / (frame_name("radar", f) + ".pcb"), traj.frames[f].radar);
      poses.push_back(traj.frames[f].pose);
    }
    write_poses(dir / "poses.txt", poses);
    traj.layout.to_config().save(dir / "layout.ini");
    spec.to_config().save(dir / "scene.ini");
  });
  std::cout << "synth: wrote " << n << " sequence(s) of " << pc.synth.frames << " frames to " << out.string() << '\n';
}

void cmd_preprocess(const PipelineConfig& pc, const std::vector<fs::path>& sequences, const fs::path& out) {
  struct Job {
    std::size_t seq;
    std::size_t frame;
  };
  std::vector<std::vector<RigidTransform>> poses;
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const fs::path& dir = sequences[s];
    poses.push_back(read_poses(dir / "poses.txt"));
    const std::size_t lidar = count_frames(dir, "lidar", ".pcb");
    const std::size_t radar = count_frames(dir, "radar", ".pcb");
    if (lidar != poses.back().size() || radar != poses.back().size()) {
      throw ValidationError("'" + dir.string() + "': " + std::to_string(poses.back().size()) + " poses but " +
                            std::to_string(lidar) + " LiDAR and " + std::to_string(radar) + " radar frames");
    }
    for (std::size_t f = 0; f < lidar; ++f) jobs.push_back({s, f});
  }
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    fs::create_directories(out / sequences[s].filename());
    copy_poses(sequences[s], out / sequences[s].filename());
  }
  const auto& pre = pc.preprocess;
  parallel_for(jobs.size(), pc.jobs, [&](std::size_t k) {
    const auto [s, f] = jobs[k];
    const fs::path& dir = sequences[s];
    const fs::path dst = out / dir.filename();

    PointCloud lidar = load_cloud(dir / (frame_name("lidar", f) + ".pcb"));
    if (pre.remove_ground) {
      GroundCfg g = pre.ground;
      g.seed = derive_seed(pc.seed, s, f);
      lidar = remove_ground(lidar, g);
    }
    lidar = filter_fov(lidar, pre.yaw_min_deg, pre.yaw_max_deg);
    save_bev(dst / frame_name("lidar", f), rasterize(lidar, pc.grid));

    // Radar: this frame plus up to frames-1 predecessors, in this frame's coordinates.
    std::vector<std::pair<PointCloud, RigidTransform>> window;
    const std::size_t first = f + 1 >= static_cast<std::size_t>(pre.frames) ? f + 1 - pre.frames : 0;
    const RigidTransform to_current = poses[s][f].inverse();
    for (std::size_t j = first; j <= f; ++j) {
      window.emplace_back(load_cloud(dir / (frame_name("radar", j) + ".pcb")), to_current * poses[s][j]);
    }
    const PointCloud radar = filter_fov(aggregate(window), pre.yaw_min_deg, pre.yaw_max_deg);
    save_bev(dst / frame_name("radar", f), rasterize(radar, pc.grid));
  });
  std::cout << "preprocess: wrote " << jobs.size() << " LiDAR/radar BEV pairs to " << out.string() << '\n';
}

void cmd_train(const PipelineConfig& pc, const std::vector<fs::path>& bev_dirs, const fs::path& out) {
  std::vector<BevSequence> seqs;
  for (const auto& d : bev_dirs) seqs.push_back(open_bev_sequence(d));
  std::vector<TrainSample> data;
  for (const auto& s : seqs) {
    for (std::size_t f = 0; f < s.frames; ++f) {
      const BevImage mu = load_bev(s.dir / frame_name("radar", f));
      const BevImage x0 = load_bev(s.dir / frame_name("lidar", f));
      if (mu.pixels.rows() != pc.grid.height || mu.pixels.cols() != pc.grid.width || !(x0.grid == mu.grid)) {
        throw ShapeMismatch("'" + (s.dir / frame_name("radar", f)).string() + "' does not match the configured grid");
      }
      data.push_back(TrainSample::make(mu.pixels, x0.pixels));
    }
  }
  const NoiseSchedule sched(pc.schedule);
  const int every = std::max(1, pc.train.iterations / 20);
  const TrainResult result = train(data, sched, pc.train, [&](const LossRecord& r) {
    if (r.iteration % every == 0 || r.iteration == pc.train.iterations) {
      std::cout << "iter " << r.iteration << " loss " << r.loss << '\n';
    }
  });
  fs::create_directories(out);
  save_checkpoint(out / "model.srdm", result.model);
  write_loss_trace(out / "loss.csv", result.trace);
  KeyValueConfig effective = pc.train.to_config();
  effective.save(out / "train.ini");
  std::cout << "train: " << data.size() << " pairs, model written to " << (out / "model.srdm").string() << '\n';
}

void cmd_enhance(const PipelineConfig& pc, const std::vector<fs::path>& bev_dirs, const fs::path& model_path,
                 bool oracle, const fs::path& out) {
  std::vector<BevSequence> seqs;
  for (const auto& d : bev_dirs) seqs.push_back(open_bev_sequence(d));
  const NoiseSchedule sched(pc.schedule);
  std::optional<DenoiserModel> model;
  if (!oracle) {
    try {
      model = load_checkpoint(model_path);
    } catch (const FormatError& e) {
      throw FormatError("checkpoint '" + model_path.string() + "': " + e.what());
    }
    const auto& a = model->arch();
    if (a.height != pc.grid.height || a.width != pc.grid.width) {
      throw ShapeMismatch("checkpoint '" + model_path.string() + "' is " + std::to_string(a.height) + "x" +
                          std::to_string(a.width) + " but the grid is " + std::to_string(pc.grid.height) + "x" +
                          std::to_string(pc.grid.width));
    }
  }
  struct Job {
    std::size_t seq;
    std::size_t frame;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    for (std::size_t f = 0; f < seqs[s].frames; ++f) jobs.push_back({s, f});
    fs::create_directories(out / seqs[s].dir.filename());
    copy_poses(seqs[s].dir, out / seqs[s].dir.filename());
  }
  parallel_for(jobs.size(), pc.jobs, [&](std::size_t k) {
    const auto [s, f] = jobs[k];
    const BevImage mu = load_bev(seqs[s].dir / frame_name("radar", f));
    Rng rng(derive_seed(pc.seed, s, f));
    BevImage enhanced;
    if (oracle) {
      const BevImage x0 = load_bev(seqs[s].dir / frame_name("lidar", f));
      enhanced = enhance(mu, OracleModel(x0.pixels, sched), sched, rng, {pc.enhance.stochastic});
    } else {
      enhanced = enhance(mu, *model, sched, rng, {pc.enhance.stochastic});
    }
    const fs::path stem = out / seqs[s].dir.filename() / frame_name("enhanced", f);
    save_bev(stem, enhanced);
    // Back-project what was saved so the cloud matches the 8-bit images.
    BevImage stored = enhanced;
    stored.pixels = dequantize(quantize(enhanced.pixels));
    save_cloud(fs::path(stem.string() + ".pcb"), back_project(stored, pc.enhance.threshold));
  });
  std::cout << "enhance: wrote " << jobs.size() << " enhanced BEVs to " << out.string() << '\n';
}

namespace {

PointCloud bev_cloud(const fs::path& stem, double threshold) { return back_project(load_bev(stem), threshold); }

PointCloud enhanced_cloud(const fs::path& enhanced_root, const fs::path& seq_dir, std::size_t f) {
  const fs::path p = enhanced_root / seq_dir.filename() / (frame_name("enhanced", f) + ".pcb");
  if (!fs::exists(p)) throw ValidationError("missing enhanced cloud '" + p.string() + "'");
  return load_cloud(p);
}

MetricReport metrics_for(const PointCloud& lidar, const PointCloud& other, Dims dims, const std::string& what) {
  try {
    return evaluate_metrics(lidar, other, dims);
  } catch (const EmptyCloud& e) {
    throw EmptyCloud(what + ": " + e.what());
  } catch (const EmptyReference& e) {
    throw EmptyReference(what + ": " + e.what());
  }
}

}  // namespace

void cmd_eval(const PipelineConfig& pc, const std::vector<fs::path>& bev_dirs, const fs::path& enhanced_root,
              const fs::path& out) {
  std::vector<BevSequence> seqs;
  for (const auto& d : bev_dirs) seqs.push_back(open_bev_sequence(d));
  if (!enhanced_root.empty()) {
    for (const auto& s : seqs) {
      for (std::size_t f = 0; f < s.frames; ++f) {
        const fs::path p = enhanced_root / s.dir.filename() / (frame_name("enhanced", f) + ".pcb");
        if (!fs::exists(p)) throw ValidationError("missing enhanced cloud '" + p.string() + "'");
      }
    }
  }
  struct Job {
    std::size_t seq;
    std::size_t frame;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    for (std::size_t f = 0; f < seqs[s].frames; ++f) jobs.push_back({s, f});
  }
  const double th = pc.enhance.threshold;
  std::vector<MetricReport> raw(jobs.size()), enh(jobs.size());
  parallel_for(jobs.size(), pc.jobs, [&](std::size_t k) {
    const auto [s, f] = jobs[k];
    const fs::path lidar_stem = seqs[s].dir / frame_name("lidar", f);
    const fs::path radar_stem = seqs[s].dir / frame_name("radar", f);
    const PointCloud lidar = bev_cloud(lidar_stem, th);
    raw[k] = metrics_for(lidar, bev_cloud(radar_stem, th), pc.eval_dims, radar_stem.string() + " vs " + lidar_stem.string());
    if (!enhanced_root.empty()) {
      const PointCloud e = enhanced_cloud(enhanced_root, seqs[s].dir, f);
      enh[k] = metrics_for(lidar, e, pc.eval_dims, "enhanced frame " + std::to_string(f) + " of " + seqs[s].dir.string());
    }
  });

  std::vector<NamedReport> rows;
  auto mean_report = [&](const std::vector<MetricReport>& v) {
    MetricReport m;
    m.dims = pc.eval_dims;
    std::vector<double> cd, mh, ucd_, um;
    for (const auto& r : v) {
      cd.push_back(r.cd);
      mh.push_back(r.mhd);
      ucd_.push_back(r.ucd);
      um.push_back(r.umhd);
    }
    m.cd = mean_of(cd);
    m.mhd = mean_of(mh);
    m.ucd = mean_of(ucd_);
    m.umhd = mean_of(um);
    return m;
  };
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const std::string tag = seqs[jobs[k].seq].dir.filename().string() + "/" + frame_name("frame", jobs[k].frame);
    rows.push_back({tag + "/radar", raw[k]});
    if (!enhanced_root.empty()) rows.push_back({tag + "/enhanced", enh[k]});
  }
  std::vector<NamedReport> summary{{"mean/radar", mean_report(raw)}};
  if (!enhanced_root.empty()) summary.push_back({"mean/enhanced", mean_report(enh)});
  rows.insert(rows.end(), summary.begin(), summary.end());

  fs::create_directories(out);
  std::ofstream csv(out / "metrics.csv");
  if (!csv) throw Error("cannot write '" + (out / "metrics.csv").string() + "'");
  write_metrics_csv(csv, rows);
  print_metrics_table(std::cout, summary);
}

void cmd_register(const PipelineConfig& pc, const std::vector<fs::path>& bev_dirs, const fs::path& enhanced_root,
                  const fs::path& out) {
  struct Seq {
    BevSequence bev;
    std::vector<RigidTransform> poses;
  };
  std::vector<Seq> seqs;
  for (const auto& d : bev_dirs) {
    Seq s{open_bev_sequence(d), read_poses(d / "poses.txt")};
    if (s.poses.size() != s.bev.frames) {
      throw ValidationError("'" + d.string() + "': " + std::to_string(s.poses.size()) + " poses for " +
                            std::to_string(s.bev.frames) + " frames");
    }
    if (!enhanced_root.empty()) {
      for (std::size_t f = 0; f < s.bev.frames; ++f) {
        const fs::path p = enhanced_root / d.filename() / (frame_name("enhanced", f) + ".pcb");
        if (!fs::exists(p)) throw ValidationError("missing enhanced cloud '" + p.string() + "'");
      }
    }
    seqs.push_back(std::move(s));
  }

  struct Job {
    std::size_t seq, i, j;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    for (const auto& [i, j] : select_pairs(seqs[s].poses, pc.reg.min_distance, pc.reg.max_distance)) {
      jobs.push_back({s, i, j});
    }
  }
  if (jobs.empty()) throw ValidationError("register: no frame pairs satisfy the distance rule");

  const double th = pc.enhance.threshold;
  const bool with_enhanced = !enhanced_root.empty();
  std::vector<PairRecord> raw(jobs.size()), enh(jobs.size());
  parallel_for(jobs.size(), pc.jobs, [&](std::size_t k) {
    const auto [s, i, j] = jobs[k];
    const Seq& seq = seqs[s];
    // target = T(source) with T = pose_i^-1 pose_j maps frame j into frame i.
    const RigidTransform gt = seq.poses[i].inverse() * seq.poses[j];
    Rng rng(derive_seed(pc.seed, s, i * 100003 + j));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::Vector3d dt(unit(rng), unit(rng), unit(rng));
    dt = dt.normalized() * pc.reg.init_translation * std::abs(unit(rng));
    Eigen::Vector3d axis(unit(rng), unit(rng), unit(rng));
    axis.normalize();
    const double angle = pc.reg.init_rotation_deg * std::abs(unit(rng)) * std::numbers::pi / 180.0;
    const RigidTransform noise(Eigen::AngleAxisd(angle, axis).toRotationMatrix(), dt);
    const RigidTransform init = noise * gt;

    auto run = [&](const PointCloud& src, const PointCloud& dst) {
      RigidTransform est = init;
      try {
        est = icp(src, dst, init, pc.reg.icp).transform;
      } catch (const EmptyCloud&) {
      } catch (const DegenerateGeometry&) {
      }
      return PairRecord{i, j, score_registration(est, gt, pc.reg.thresholds)};
    };
    const fs::path& dir = seq.bev.dir;
    raw[k] = run(bev_cloud(dir / frame_name("radar", j), th), bev_cloud(dir / frame_name("radar", i), th));
    if (with_enhanced) {
      enh[k] = run(enhanced_cloud(enhanced_root, dir, j), enhanced_cloud(enhanced_root, dir, i));
    }
  });

  fs::create_directories(out);
  auto summarize = [&](const std::vector<PairRecord>& rows, const std::string& name) {
    std::ofstream csv(out / ("pairs_" + name + ".csv"));
    if (!csv) throw Error("cannot write pair results");
    write_pair_results_csv(csv, rows);
    std::vector<RegistrationResult> results;
    for (const auto& r : rows) results.push_back(r.result);
    return std::make_pair(name, registration_recall(results));
  };
  std::vector<std::pair<std::string, RecallSummary>> table{summarize(raw, "radar")};
  if (with_enhanced) table.push_back(summarize(enh, "enhanced"));
  std::ofstream summary(out / "summary.txt");
  print_recall_table(summary, table);
  print_recall_table(std::cout, table);
}

}  // namespace radarsr::cli
