#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "radarsr/bev.hpp"
#include "radarsr/kv_config.hpp"

namespace radarsr {

using Rng = std::mt19937_64;

class ScoreModel;

enum class ScheduleKind { kConstant, kCosine };

struct ScheduleCfg {
  int steps = 100;             // T
  double theta_bar_T = 5.3;    // integrated mean-reversion rate at t = T
  double lambda = 50.0 / 255;  // stationary standard deviation
  double dt = 1.0;
  ScheduleKind kind = ScheduleKind::kConstant;

  KeyValueConfig to_config() const;
  static ScheduleCfg from_config(const KeyValueConfig& cfg, const std::string& prefix = "");
};

/// Discretized mean-reverting schedule. Arrays are indexed by step
/// t = 0..T; theta(0) is unused and zero so that theta_bar(0) = 0.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(const ScheduleCfg& cfg = {});
  /// Explicit per-step rates theta_1..theta_T.
  NoiseSchedule(std::vector<double> theta, double lambda, double dt = 1.0);

  int steps() const { return steps_; }
  double dt() const { return dt_; }
  double lambda() const { return lambda_; }
  double theta(int t) const { return theta_.at(t); }
  /// sigma_t = sqrt(2 lambda^2 theta_t).
  double sigma(int t) const { return sigma_.at(t); }
  double theta_bar(int t) const { return theta_bar_.at(t); }
  /// v_t = lambda^2 (1 - exp(-2 theta_bar_t)).
  double variance(int t) const { return variance_.at(t); }
  double decay(int t) const { return std::exp(-theta_bar(t)); }
  ScheduleCfg config() const { return cfg_; }

 private:
  void derive();

  ScheduleCfg cfg_;
  int steps_ = 0;
  double dt_ = 1.0;
  double lambda_ = 0.0;
  std::vector<double> theta_, sigma_, theta_bar_, variance_;
};

struct Marginal {
  Image mean;
  double variance = 0.0;
};

/// Closed-form law of x(t) given x(0) = x0: N(mu + (x0 - mu) e^{-theta_bar_t}, v_t).
Marginal marginal(const Image& x0, const Image& mu, const NoiseSchedule& sched, int t);

struct ForwardSample {
  Image state;
  Image noise;
};

/// x_t = m_t + sqrt(v_t) * eps with eps ~ N(0, I); returns both.
ForwardSample forward_sample(const Image& x0, const Image& mu, const NoiseSchedule& sched, int t, Rng& rng);

/// Euler-Maruyama simulation of dx = theta_t (mu - x) dt + sigma_t dw with
/// `substeps` sub-intervals per schedule step. Returns the states at
/// t = 0..T. `sigma_override` replaces every sigma_t when set.
std::vector<Image> euler_forward_path(const Image& x0, const Image& mu, const NoiseSchedule& sched, int substeps,
                                      Rng& rng, std::optional<double> sigma_override = std::nullopt);

/// Gaussian score -(x_t - m_t) / v_t. Throws DegenerateVariance when v_t <= 0.
Image true_score(const Image& x_t, const Image& m_t, double v_t);

/// One reverse-time Euler-Maruyama step from t to t-1:
///   x_{t-1} = x_t - [theta_t (mu - x_t) - sigma_t^2 score] dt + sigma_t sqrt(dt) z.
/// The noise term is only drawn when `stochastic` is set and t > 1; the
/// final step lands on t = 0 where the marginal variance is zero.
Image reverse_step(const Image& x_t, const Image& mu, const NoiseSchedule& sched, int t, const Image& score,
                   Rng& rng, bool stochastic = true);

struct EnhanceOptions {
  bool stochastic = true;
};

/// Runs the full reverse chain from x(T) = mu + lambda * z, using the score
/// -eps_hat / sqrt(v_t) from `model`, and clamps the result to [0, 1].
BevImage enhance(const BevImage& mu, const ScoreModel& model, const NoiseSchedule& sched, Rng& rng,
                 const EnhanceOptions& opts = {});

/// Fills an image with i.i.d. standard normal samples.
Image standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace radarsr
