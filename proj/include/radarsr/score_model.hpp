#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "radarsr/sde.hpp"

namespace radarsr {

/// Noise predictor eps_hat(x_t, mu, t). Implementations are deterministic
/// functions of their inputs and parameters.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  virtual Image predict(const Image& x_t, const Image& mu, int t) const = 0;
};

/// Test oracle that knows the clean image and inverts the forward marginal:
/// eps = (x_t - m_t(x0)) / sqrt(v_t).
class OracleModel : public ScoreModel {
 public:
  OracleModel(Image x0, NoiseSchedule sched) : x0_(std::move(x0)), sched_(std::move(sched)) {}

  /// Throws DegenerateVariance at t = 0.
  Image predict(const Image& x_t, const Image& mu, int t) const override;

  const Image& clean() const { return x0_; }

 private:
  Image x0_;
  NoiseSchedule sched_;
};

/// Interleaved sinusoidal embedding: [sin(t f_0), cos(t f_0), sin(t f_1), ...]
/// with f_k = 10000^{-2k/dim}. `dim` must be even.
Eigen::VectorXd time_embedding(double t, int dim);

struct DenoiserArch {
  int height = 32;
  int width = 32;
  std::vector<int> widths{16, 32};  // channels per encoder level; depth = widths.size()
  int time_dim = 32;

  int depth() const { return static_cast<int>(widths.size()); }
  void validate() const;
  bool operator==(const DenoiserArch&) const = default;
};

/// Channel-major feature map.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w) : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, 0.0) {}
  double* channel(int c) { return data.data() + static_cast<std::size_t>(c) * height * width; }
  const double* channel(int c) const { return data.data() + static_cast<std::size_t>(c) * height * width; }
  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
};

/// Activations recorded by DenoiserModel::forward for the backward pass.
struct ForwardContext {
  bool recorded = false;
  Eigen::VectorXd embedding;
  std::vector<FeatureMap> enc_in, enc_pre, enc_out;  // per encoder level
  FeatureMap mid_in, mid_pre;
  std::vector<FeatureMap> dec_in, dec_pre;  // indexed by level
  FeatureMap head_in;
};

/// Compact conditional encoder-decoder. The noisy state and the condition
/// are stacked as two input channels; each encoder level is pool -> 3x3
/// conv -> +time projection -> SiLU, followed by a bottleneck at 1/2^depth
/// resolution; the decoder upsamples, concatenates the skip and convolves;
/// a final 3x3 conv produces one channel.
class DenoiserModel : public ScoreModel {
 public:
  /// Uniform(+-sqrt(1/fan_in)) init; the output layer starts at zero.
  explicit DenoiserModel(DenoiserArch arch = {}, std::uint64_t seed = 0);
  DenoiserModel(DenoiserArch arch, Eigen::VectorXd params);

  const DenoiserArch& arch() const { return arch_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  Eigen::VectorXd& parameters() { return params_; }
  Eigen::Index parameter_count() const { return params_.size(); }

  Image predict(const Image& x_t, const Image& mu, int t) const override;

  /// Forward pass; fills `ctx` when non-null.
  Image forward(const Image& x_t, const Image& mu, int t, ForwardContext* ctx = nullptr) const;

  /// Gradient of sum(upstream .* output) w.r.t. every parameter, for the
  /// forward pass recorded in `ctx`. Throws MissingForwardContext otherwise.
  Eigen::VectorXd backward(const ForwardContext& ctx, const Image& upstream) const;

 private:
  struct Conv {
    int in = 0, out = 0;
    Eigen::Index weight = 0, bias = 0;  // offsets into params_
  };
  struct Linear {
    int in = 0, out = 0;
    Eigen::Index weight = 0, bias = 0;
  };

  void layout();

  DenoiserArch arch_;
  std::vector<Conv> enc_, dec_;
  Conv mid_, head_;
  std::vector<Linear> time_proj_;  // one per encoder level plus the bottleneck
  Eigen::VectorXd params_;
};

}  // namespace radarsr
