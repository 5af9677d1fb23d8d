#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "radarsr/bev.hpp"
#include "radarsr/kv_config.hpp"
#include "radarsr/score_model.hpp"
#include "radarsr/sde.hpp"

namespace radarsr {

enum class Optimizer { kSgdMomentum, kAdam };

struct TrainConfig {
  double w = 2.0;              // blank-region weight
  std::vector<double> gamma;   // per-step weights gamma_1..gamma_T; empty means all 1
  int batch_size = 4;
  int iterations = 2000;
  double learning_rate = 1e-3;
  double momentum = 0.9;  // SGD momentum, or Adam's first-moment decay
  double beta2 = 0.999;   // Adam only
  Optimizer optimizer = Optimizer::kAdam;
  std::uint64_t seed = 0;
  DenoiserArch arch;

  double gamma_at(int i) const { return gamma.empty() ? 1.0 : gamma.at(static_cast<std::size_t>(i - 1)); }
  void validate(const NoiseSchedule& sched) const;

  KeyValueConfig to_config() const;
  static TrainConfig from_config(const KeyValueConfig& cfg, const std::string& prefix = "");
};

struct TrainSample {
  Image mu;  // radar BEV
  Image x0;  // LiDAR BEV
  Masks masks;

  static TrainSample make(Image mu, Image x0);
};

/// Posterior mean of x(i-1) given x(i) = x_i and x(0) = x0 under the
/// discrete OU chain with exact per-step transitions.
Image ideal_prev_state(const Image& x0, const Image& x_i, const Image& mu, const NoiseSchedule& sched, int i);

/// Deterministic reverse step from i using score -eps_hat / sqrt(v_i).
Image reversed_prev_state(const Image& x_i, const Image& mu, const NoiseSchedule& sched, int i, const Image& eps_hat);

struct LossTerms {
  double loss = 0.0;
  double j_target = 0.0;  // mean |r| over the target mask
  double j_blank = 0.0;   // mean |r| over the blank mask
  Image grad_residual;    // d loss / d r
};

/// gamma * (mean_M |r| + w * mean_Mbar |r|). An empty region contributes 0.
LossTerms masked_objective(const Image& residual, const Masks& masks, double w, double gamma);

/// Loss for an arbitrary predictor, without parameter gradients.
LossTerms evaluate_masked_loss(const TrainSample& sample, const NoiseSchedule& sched, const ScoreModel& model, int i,
                               Rng& rng, const TrainConfig& cfg);

struct LossWithGradient {
  LossTerms terms;
  Eigen::VectorXd gradient;
};

/// Draws x_i from the forward marginal, compares the model's reversed state
/// with the ideal previous state and backpropagates into the parameters.
LossWithGradient masked_loss(const TrainSample& sample, const NoiseSchedule& sched, const DenoiserModel& model, int i,
                             Rng& rng, const TrainConfig& cfg);

struct LossRecord {
  int iteration = 0;
  double loss = 0.0;
  double j_target = 0.0;
  double j_blank = 0.0;
};

struct TrainResult {
  DenoiserModel model;
  std::vector<LossRecord> trace;
};

using TrainCallback = std::function<void(const LossRecord&)>;

/// Adam (or SGD with momentum) over uniformly drawn (sample, step) pairs. Throws
/// DivergenceError if the loss or the parameters become non-finite.
TrainResult train(const std::vector<TrainSample>& dataset, const NoiseSchedule& sched, const TrainConfig& cfg,
                  const TrainCallback& on_iteration = {});

/// Trailing moving average with the given window.
std::vector<double> smooth(const std::vector<double>& values, std::size_t window);

/// CSV with header "iteration,loss,J_target,J_blank".
void write_loss_trace(const std::filesystem::path& path, const std::vector<LossRecord>& trace);

}  // namespace radarsr
