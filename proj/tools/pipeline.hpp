#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "radarsr/bev.hpp"
#include "radarsr/kdtree.hpp"
#include "radarsr/kv_config.hpp"
#include "radarsr/pointcloud.hpp"
#include "radarsr/registration.hpp"
#include "radarsr/sde.hpp"
#include "radarsr/synth.hpp"
#include "radarsr/training.hpp"

namespace radarsr::cli {

namespace fs = std::filesystem;

struct SynthSettings {
  int sequences = 1;
  int frames = 10;
  double step = 0.5;  // meters between consecutive poses
  double yaw_jitter_deg = 2.0;
};

struct PreprocessSettings {
  int frames = 5;  // radar frames aggregated per BEV
  double yaw_min_deg = 30.0;
  double yaw_max_deg = 150.0;
  bool remove_ground = true;
  GroundCfg ground;
};

struct EnhanceSettings {
  bool stochastic = true;
  double threshold = kBackProjectThreshold;
};

struct RegisterSettings {
  RegistrationThresholds thresholds;
  double min_distance = 1.0;
  double max_distance = 10.0;
  // ICP starts from the true relative pose disturbed by a random offset of
  // up to these magnitudes.
  double init_translation = 0.3;
  double init_rotation_deg = 3.0;
  IcpCfg icp;
};

/// Everything a command may need, parsed and validated up front.
struct PipelineConfig {
  KeyValueConfig raw;
  std::uint64_t seed = 0;
  int jobs = 1;
  SceneSpec scene;
  SynthSettings synth;
  BevGrid grid;
  PreprocessSettings preprocess;
  ScheduleCfg schedule;
  TrainConfig train;
  EnhanceSettings enhance;
  Dims eval_dims = Dims::k2D;
  RegisterSettings reg;

  /// Throws ValidationError on any out-of-range value.
  static PipelineConfig from(const KeyValueConfig& cfg, int jobs);
};

/// Reads `path` when non-empty, then applies "key=value" overrides and the seed.
KeyValueConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                           const std::string& seed);

void cmd_synth(const PipelineConfig& pc, const fs::path& out);
void cmd_preprocess(const PipelineConfig& pc, const std::vector<fs::path>& sequences, const fs::path& out);
void cmd_train(const PipelineConfig& pc, const std::vector<fs::path>& bev_dirs, const fs::path& out);
/// Uses the checkpoint unless `oracle` is set, in which case each LiDAR BEV
/// drives an exact noise predictor.
void cmd_enhance(const PipelineConfig& pc, const std::vector<fs::path>& bev_dirs, const fs::path& model,
                 bool oracle, const fs::path& out);
void cmd_eval(const PipelineConfig& pc, const std::vector<fs::path>& bev_dirs, const fs::path& enhanced_root,
              const fs::path& out);
void cmd_register(const PipelineConfig& pc, const std::vector<fs::path>& bev_dirs, const fs::path& enhanced_root,
                  const fs::path& out);

// Sequence files shared by the commands.
std::vector<RigidTransform> read_poses(const fs::path& path);
void write_poses(const fs::path& path, const std::vector<RigidTransform>& poses);
std::string frame_name(const std::string& kind, std::size_t index);

}  // namespace radarsr::cli
