#include <cmath>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "radarsr/errors.hpp"
#include "radarsr/score_model.hpp"
#include "radarsr/sde.hpp"

using namespace radarsr;

namespace {

Image scalar(double v) { return Image::Constant(1, 1, v); }

Image uniform_image(Eigen::Index n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(n, n);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = u(rng);
  return img;
}

double relative_l2(const Image& a, const Image& b) { return (a - b).matrix().norm() / b.matrix().norm(); }

// Two-pass mean and unbiased variance.
std::pair<double, double> moments(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, ss / (n - 1)};
}

}  // namespace

TEST(Schedule, SigmaIdentityHoldsExactly) {
  for (auto kind : {ScheduleKind::kConstant, ScheduleKind::kCosine}) {
    ScheduleCfg cfg;
    cfg.kind = kind;
    const NoiseSchedule s(cfg);
    for (int t = 1; t <= s.steps(); ++t) {
      EXPECT_NEAR(s.sigma(t) * s.sigma(t), 2 * s.lambda() * s.lambda() * s.theta(t), 1e-15);
    }
    EXPECT_NEAR(s.theta_bar(s.steps()), 5.3, 1e-12);
    EXPECT_EQ(s.theta_bar(0), 0.0);
    EXPECT_EQ(s.variance(0), 0.0);
  }
}

TEST(Schedule, CosineRatesIncrease) {
  ScheduleCfg cfg;
  cfg.kind = ScheduleKind::kCosine;
  const NoiseSchedule s(cfg);
  for (int t = 2; t <= s.steps(); ++t) EXPECT_GT(s.theta(t), s.theta(t - 1));
}

TEST(Schedule, ConfigRoundTrip) {
  ScheduleCfg cfg;
  cfg.steps = 40;
  cfg.theta_bar_T = 4.0;
  cfg.kind = ScheduleKind::kCosine;
  std::stringstream ss;
  cfg.to_config().write(ss);
  const ScheduleCfg back = ScheduleCfg::from_config(KeyValueConfig::parse(ss));
  EXPECT_EQ(back.steps, 40);
  EXPECT_EQ(back.theta_bar_T, 4.0);
  EXPECT_EQ(back.lambda, cfg.lambda);
  EXPECT_EQ(back.kind, ScheduleKind::kCosine);
}

TEST(Schedule, RejectsBadValues) {
  ScheduleCfg cfg;
  cfg.steps = 0;
  EXPECT_THROW(NoiseSchedule{cfg}, ValidationError);
  cfg = {};
  cfg.lambda = 0;
  EXPECT_THROW(NoiseSchedule{cfg}, ValidationError);
  EXPECT_THROW(NoiseSchedule({0.1, -0.1}, 0.2), ValidationError);
}

TEST(Marginal, AtZeroIsCleanImage) {
  Rng rng(1);
  const Image x0 = uniform_image(8, rng), mu = uniform_image(8, rng);
  const Marginal m = marginal(x0, mu, NoiseSchedule{}, 0);
  EXPECT_TRUE((m.mean == x0).all());
  EXPECT_EQ(m.variance, 0.0);
}

TEST(Marginal, ZeroDeviationStaysAtMean) {
  Rng rng(2);
  const Image mu = uniform_image(8, rng);
  const NoiseSchedule s;
  for (int t : {0, 1, 50, 100}) EXPECT_TRUE((marginal(mu, mu, s, t).mean == mu).all());
}

TEST(Marginal, TerminalLimit) {
  Rng rng(3);
  const Image x0 = uniform_image(8, rng), mu = uniform_image(8, rng);
  const NoiseSchedule s;
  const Marginal m = marginal(x0, mu, s, s.steps());
  const double lam2 = s.lambda() * s.lambda();
  EXPECT_LE((m.mean - mu).abs().maxCoeff(), std::exp(-5.0) * (x0 - mu).abs().maxCoeff());
  EXPECT_LE(std::abs(m.variance - lam2), lam2 * std::exp(-10.0));
}

TEST(Marginal, ShapeMismatchThrows) {
  EXPECT_THROW(marginal(Image::Zero(2, 2), Image::Zero(2, 3), NoiseSchedule{}, 1), ShapeMismatch);
  EXPECT_THROW(marginal(Image::Zero(2, 2), Image::Zero(2, 2), NoiseSchedule{}, 101), ValidationError);
}

TEST(ForwardSample, AtZeroIgnoresNoise) {
  Rng rng(4);
  const Image x0 = uniform_image(4, rng), mu = uniform_image(4, rng);
  EXPECT_TRUE((forward_sample(x0, mu, NoiseSchedule{}, 0, rng).state == x0).all());
}

TEST(ForwardSample, DeterministicForSeed) {
  Rng a(9), b(9);
  const Image x0 = Image::Constant(6, 6, 0.3), mu = Image::Constant(6, 6, 0.1);
  const ForwardSample s1 = forward_sample(x0, mu, NoiseSchedule{}, 37, a);
  const ForwardSample s2 = forward_sample(x0, mu, NoiseSchedule{}, 37, b);
  EXPECT_TRUE((s1.state == s2.state).all());
  EXPECT_TRUE((s1.noise == s2.noise).all());
}

TEST(ForwardSample, MonteCarloMoments) {
  const NoiseSchedule s;
  const int t = 30;
  Rng rng(5);
  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(forward_sample(scalar(0.9), scalar(0.2), s, t, rng).state(0, 0));
  const auto [mean, var] = moments(xs);
  const Marginal m = marginal(scalar(0.9), scalar(0.2), s, t);
  EXPECT_LE(std::abs(mean - m.mean(0, 0)), 4 * std::sqrt(m.variance / 10000));
  EXPECT_LE(std::abs(var - m.variance), 0.05 * m.variance);
}

TEST(EulerForward, NoiselessPathIsExponentialDecay) {
  const NoiseSchedule s;
  Rng rng(1);
  const auto path = euler_forward_path(scalar(1.0), scalar(0.0), s, 200, rng, 0.0);
  ASSERT_EQ(path.size(), 101u);
  for (int t : {10, 50, 100}) EXPECT_NEAR(path[t](0, 0), std::exp(-s.theta_bar(t)), 2e-3 * std::exp(-s.theta_bar(t)));
  for (int t = 1; t <= 100; ++t) EXPECT_LT(path[t](0, 0), path[t - 1](0, 0));
}

TEST(EulerForward, MatchesMarginalAtHalfway) {
  // Scaled-down form of the full oracle; 4000 paths keep the unit suite quick.
  const NoiseSchedule s;
  Rng rng(6);
  const int n = 4000, t = 50;
  std::vector<double> xs;
  Image x0 = Image::Constant(1, n, 0.95), mu = Image::Constant(1, n, 0.05);
  const auto path = euler_forward_path(x0, mu, s, 10, rng);
  for (int i = 0; i < n; ++i) xs.push_back(path[t](0, i));
  const auto [mean, var] = moments(xs);
  const Marginal m = marginal(scalar(0.95), scalar(0.05), s, t);
  EXPECT_LE(std::abs(mean - m.mean(0, 0)), 0.02 * 0.9);
  EXPECT_LE(std::abs(var - m.variance), 0.08 * m.variance);
}

TEST(EulerForward, StationaryAroundMean) {
  const NoiseSchedule s;
  Rng rng(8);
  const Image mu = Image::Constant(1, 4000, 0.4);
  const auto path = euler_forward_path(mu, mu, s, 10, rng);
  const double mean = path[s.steps()].mean();
  EXPECT_NEAR(mean, 0.4, 4 * s.lambda() / std::sqrt(4000.0));
}

TEST(TrueScore, ModeIsZero) {
  const Image m = Image::Constant(3, 3, 0.2);
  EXPECT_EQ(true_score(m, m, 0.5).abs().maxCoeff(), 0.0);
}

TEST(TrueScore, HandValue) { EXPECT_EQ(true_score(scalar(2.0), scalar(0.0), 4.0)(0, 0), -0.5); }

TEST(TrueScore, DegenerateVarianceThrows) {
  EXPECT_THROW(true_score(scalar(1), scalar(0), 0.0), DegenerateVariance);
  EXPECT_THROW(true_score(scalar(1), scalar(0), -1.0), DegenerateVariance);
}

TEST(TrueScore, MatchesNoiseIdentity) {
  const NoiseSchedule s;
  Rng rng(10);
  for (int k = 0; k < 20; ++k) {
    const int t = 1 + static_cast<int>(rng() % 100);
    const Image x0 = uniform_image(5, rng), mu = uniform_image(5, rng);
    const ForwardSample f = forward_sample(x0, mu, s, t, rng);
    const Marginal m = marginal(x0, mu, s, t);
    const Image lhs = true_score(f.state, m.mean, m.variance);
    EXPECT_LE((lhs + f.noise / std::sqrt(m.variance)).abs().maxCoeff(), 1e-12);
  }
}

TEST(ReverseStep, ZeroDriftLeavesState) {
  // mu == x makes the mean-reversion term vanish.
  const NoiseSchedule s;
  Rng rng(1);
  const Image x = Image::Constant(4, 4, 0.37);
  const Image out = reverse_step(x, x, s, 10, Image::Zero(4, 4), rng, false);
  EXPECT_TRUE((out == x).all());
}

TEST(ReverseStep, DeterministicForSeed) {
  const NoiseSchedule s;
  Rng a(3), b(3);
  const Image x = Image::Constant(4, 4, 0.5), mu = Image::Constant(4, 4, 0.1), sc = Image::Constant(4, 4, 0.2);
  EXPECT_TRUE((reverse_step(x, mu, s, 50, sc, a) == reverse_step(x, mu, s, 50, sc, b)).all());
}

TEST(ReverseStep, ExplicitUpdate) {
  const NoiseSchedule s({0.25, 0.5}, 0.5);
  Rng rng(0);
  // x - [theta (mu - x) - sigma^2 score] dt with theta=0.5, sigma^2=0.25.
  const Image out = reverse_step(scalar(1.0), scalar(0.2), s, 2, scalar(-0.4), rng, false);
  EXPECT_DOUBLE_EQ(out(0, 0), 1.0 - (0.5 * (0.2 - 1.0) - 0.25 * -0.4));
}

TEST(ReverseStep, OracleChainReconstructs) {
  const NoiseSchedule s;
  Rng rng(11);
  for (int k = 0; k < 3; ++k) {
    const Image x0 = uniform_image(32, rng), mu = uniform_image(32, rng);
    Image x = forward_sample(x0, mu, s, s.steps(), rng).state;
    for (int t = s.steps(); t >= 1; --t) {
      const Marginal m = marginal(x0, mu, s, t);
      x = reverse_step(x, mu, s, t, true_score(x, m.mean, m.variance), rng, true);
    }
    EXPECT_LT(relative_l2(x, x0), 0.05);
  }
}

TEST(Enhance, OracleReconstructsAndStaysInRange) {
  const NoiseSchedule s;
  Rng rng(12);
  BevGrid g;
  g.width = g.height = 32;
  const Image x0 = uniform_image(32, rng);
  const BevImage mu{g, uniform_image(32, rng)};
  const OracleModel oracle(x0, s);
  for (bool stochastic : {true, false}) {
    const BevImage out = enhance(mu, oracle, s, rng, {stochastic});
    EXPECT_LT(relative_l2(out.pixels, x0), 0.05);
    EXPECT_GE(out.pixels.minCoeff(), 0.0);
    EXPECT_LE(out.pixels.maxCoeff(), 1.0);
    EXPECT_EQ(out.grid, g);
  }
}

TEST(Enhance, LowNoiseLimitInvertsMeanReversion) {
  ScheduleCfg cfg;
  cfg.lambda = 1e-6;
  const NoiseSchedule s(cfg);
  Rng rng(13);
  BevGrid g;
  g.width = g.height = 16;
  const Image x0 = uniform_image(16, rng);
  const BevImage mu{g, uniform_image(16, rng)};
  const BevImage out = enhance(mu, OracleModel(x0, s), s, rng);
  // What remains is the Euler discretization error of the reverse chain.
  EXPECT_LT((out.pixels - x0).abs().maxCoeff(), 5e-3);
}

TEST(Enhance, BitIdenticalForSeed) {
  const NoiseSchedule s;
  Rng r0(14);
  BevGrid g;
  g.width = g.height = 16;
  const Image x0 = uniform_image(16, r0);
  const BevImage mu{g, uniform_image(16, r0)};
  const OracleModel oracle(x0, s);
  Rng a(99), b(99);
  EXPECT_TRUE((enhance(mu, oracle, s, a).pixels == enhance(mu, oracle, s, b).pixels).all());
}
