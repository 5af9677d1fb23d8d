#include "radarsr/sde.hpp"

#include <cmath>
#include <numbers>

#include "radarsr/errors.hpp"
#include "radarsr/score_model.hpp"

namespace radarsr {

KeyValueConfig ScheduleCfg::to_config() const {
  KeyValueConfig cfg;
  cfg.set("T", steps);
  cfg.set("theta_bar_T", theta_bar_T);
  cfg.set("lambda", lambda);
  cfg.set("dt", dt);
  cfg.set("schedule_kind", kind == ScheduleKind::kCosine ? "cosine" : "constant");
  return cfg;
}

ScheduleCfg ScheduleCfg::from_config(const KeyValueConfig& cfg, const std::string& prefix) {
  ScheduleCfg s;
  s.steps = static_cast<int>(cfg.get_int(prefix + "T", s.steps));
  s.theta_bar_T = cfg.get_double(prefix + "theta_bar_T", s.theta_bar_T);
  s.lambda = cfg.get_double(prefix + "lambda", s.lambda);
  s.dt = cfg.get_double(prefix + "dt", s.dt);
  const std::string kind = cfg.get_string(prefix + "schedule_kind", "constant");
  if (kind == "constant") {
    s.kind = ScheduleKind::kConstant;
  } else if (kind == "cosine") {
    s.kind = ScheduleKind::kCosine;
  } else {
    throw ValidationError("unknown schedule_kind '" + kind + "'");
  }
  return s;
}

NoiseSchedule::NoiseSchedule(const ScheduleCfg& cfg) : cfg_(cfg), steps_(cfg.steps), dt_(cfg.dt), lambda_(cfg.lambda) {
  if (cfg.steps < 1) throw ValidationError("schedule: T must be >= 1");
  if (!(cfg.theta_bar_T > 0) || !(cfg.dt > 0)) throw ValidationError("schedule: theta_bar_T and dt must be > 0");
  theta_.assign(static_cast<std::size_t>(steps_) + 1, 0.0);
  const double T = steps_;
  if (cfg.kind == ScheduleKind::kConstant) {
    for (int i = 1; i <= steps_; ++i) theta_[i] = cfg.theta_bar_T / (T * dt_);
  } else {
    // Rates ramp up along a half cosine, rescaled to hit theta_bar_T.
    double total = 0.0;
    for (int i = 1; i <= steps_; ++i) {
      theta_[i] = 1.0 - std::cos(std::numbers::pi * i / (T + 1.0));
      total += theta_[i] * dt_;
    }
    for (int i = 1; i <= steps_; ++i) theta_[i] *= cfg.theta_bar_T / total;
  }
  derive();
}

NoiseSchedule::NoiseSchedule(std::vector<double> theta, double lambda, double dt)
    : steps_(static_cast<int>(theta.size())), dt_(dt), lambda_(lambda) {
  if (theta.empty()) throw ValidationError("schedule: need at least one step");
  if (!(dt > 0)) throw ValidationError("schedule: dt must be > 0");
  theta_.assign(1, 0.0);
  theta_.insert(theta_.end(), theta.begin(), theta.end());
  cfg_.steps = steps_;
  cfg_.dt = dt;
  cfg_.lambda = lambda;
  derive();
  cfg_.theta_bar_T = theta_bar_.back();
}

void NoiseSchedule::derive() {
  if (!(lambda_ > 0)) throw ValidationError("schedule: lambda must be > 0");
  for (int i = 1; i <= steps_; ++i) {
    if (!(theta_[i] > 0)) throw ValidationError("schedule: every theta_t must be > 0");
  }
  const std::size_t n = theta_.size();
  sigma_.assign(n, 0.0);
  theta_bar_.assign(n, 0.0);
  variance_.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    sigma_[i] = std::sqrt(2.0 * lambda_ * lambda_ * theta_[i]);
    theta_bar_[i] = theta_bar_[i - 1] + theta_[i] * dt_;
    variance_[i] = lambda_ * lambda_ * -std::expm1(-2.0 * theta_bar_[i]);
  }
}

namespace {

void check_step(const NoiseSchedule& sched, int t, int lo) {
  if (t < lo || t > sched.steps()) {
    throw ValidationError("step " + std::to_string(t) + " outside [" + std::to_string(lo) + ", " +
                          std::to_string(sched.steps()) + "]");
  }
}

void check_shapes(const Image& a, const Image& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeMismatch(std::string(what) + ": shape mismatch");
}

}  // namespace

Image standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Image out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = normal(rng);
  return out;
}

Marginal marginal(const Image& x0, const Image& mu, const NoiseSchedule& sched, int t) {
  check_shapes(x0, mu, "marginal");
  check_step(sched, t, 0);
  if (t == 0) return {x0, 0.0};  // mu + (x0 - mu) can differ from x0 by an ulp
  return {mu + (x0 - mu) * sched.decay(t), sched.variance(t)};
}

ForwardSample forward_sample(const Image& x0, const Image& mu, const NoiseSchedule& sched, int t, Rng& rng) {
  Marginal m = marginal(x0, mu, sched, t);
  ForwardSample out;
  out.noise = standard_normal(x0.rows(), x0.cols(), rng);
  out.state = m.mean + std::sqrt(m.variance) * out.noise;
  return out;
}

std::vector<Image> euler_forward_path(const Image& x0, const Image& mu, const NoiseSchedule& sched, int substeps,
                                      Rng& rng, std::optional<double> sigma_override) {
  check_shapes(x0, mu, "euler_forward_path");
  if (substeps < 1) throw ValidationError("euler_forward_path: substeps must be >= 1");
  const double h = sched.dt() / substeps;
  const double sqrt_h = std::sqrt(h);
  std::vector<Image> path;
  path.reserve(static_cast<std::size_t>(sched.steps()) + 1);
  path.push_back(x0);
  Image x = x0;
  for (int t = 1; t <= sched.steps(); ++t) {
    const double theta = sched.theta(t);
    const double sigma = sigma_override.value_or(sched.sigma(t));
    for (int k = 0; k < substeps; ++k) {
      const Image drift = theta * (mu - x);
      if (sigma != 0.0) {
        x += drift * h + sigma * sqrt_h * standard_normal(x.rows(), x.cols(), rng);
      } else {
        x += drift * h;
      }
    }
    path.push_back(x);
  }
  return path;
}

Image true_score(const Image& x_t, const Image& m_t, double v_t) {
  check_shapes(x_t, m_t, "true_score");
  if (!(v_t > 0)) throw DegenerateVariance("true_score: variance must be > 0");
  return -(x_t - m_t) / v_t;
}

Image reverse_step(const Image& x_t, const Image& mu, const NoiseSchedule& sched, int t, const Image& score,
                   Rng& rng, bool stochastic) {
  check_shapes(x_t, mu, "reverse_step");
  check_shapes(x_t, score, "reverse_step");
  check_step(sched, t, 1);
  const double theta = sched.theta(t);
  const double sigma = sched.sigma(t);
  const double dt = sched.dt();
  Image next = x_t - (theta * (mu - x_t) - sigma * sigma * score) * dt;
  if (stochastic && t > 1) next += sigma * std::sqrt(dt) * standard_normal(x_t.rows(), x_t.cols(), rng);
  return next;
}

BevImage enhance(const BevImage& mu, const ScoreModel& model, const NoiseSchedule& sched, Rng& rng,
                 const EnhanceOptions& opts) {
  const Image& cond = mu.pixels;
  Image x = cond + sched.lambda() * standard_normal(cond.rows(), cond.cols(), rng);
  for (int t = sched.steps(); t >= 1; --t) {
    const Image eps_hat = model.predict(x, cond, t);
    const Image score = -eps_hat / std::sqrt(sched.variance(t));
    x = reverse_step(x, cond, sched, t, score, rng, opts.stochastic);
  }
  return {mu.grid, x.cwiseMax(0.0).cwiseMin(1.0)};
}

}  // namespace radarsr
