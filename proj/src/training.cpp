#include "radarsr/training.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "radarsr/errors.hpp"

namespace radarsr {

void TrainConfig::validate(const NoiseSchedule& sched) const {
  if (!(w >= 0)) throw ValidationError("train: w must be >= 0");
  if (!gamma.empty()) {
    if (static_cast<int>(gamma.size()) != sched.steps()) throw ValidationError("train: gamma needs one weight per step");
    for (double g : gamma) {
      if (!(g > 0)) throw ValidationError("train: every gamma_i must be > 0");
    }
  }
  if (batch_size < 1 || iterations < 0) throw ValidationError("train: batch_size >= 1 and iterations >= 0 required");
  if (!(learning_rate > 0) || !(momentum >= 0 && momentum < 1)) {
    throw ValidationError("train: learning_rate > 0 and momentum in [0, 1) required");
  }
  if (!(beta2 >= 0 && beta2 < 1)) throw ValidationError("train: beta2 must be in [0, 1)");
  arch.validate();
}

KeyValueConfig TrainConfig::to_config() const {
  KeyValueConfig cfg;
  cfg.set("w", w);
  if (!gamma.empty()) {
    std::string joined;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      KeyValueConfig tmp;
      tmp.set("v", gamma[i]);
      joined += (i ? "," : "") + *tmp.raw("v");
    }
    cfg.set("gamma", joined);
  }
  cfg.set("batch_size", batch_size);
  cfg.set("iterations", iterations);
  cfg.set("learning_rate", learning_rate);
  cfg.set("momentum", momentum);
  cfg.set("beta2", beta2);
  cfg.set("seed", static_cast<long long>(seed));
  cfg.set("height", arch.height);
  cfg.set("width", arch.width);
  std::string widths;
  for (std::size_t i = 0; i < arch.widths.size(); ++i) widths += (i ? "," : "") + std::to_string(arch.widths[i]);
  cfg.set("widths", widths);
  cfg.set("time_dim", arch.time_dim);
  // Full-scale runs used Lion at lr 4e-5.
  cfg.set("optimizer", optimizer == Optimizer::kAdam ? "adam" : "sgd_momentum");
  return cfg;
}

TrainConfig TrainConfig::from_config(const KeyValueConfig& cfg, const std::string& prefix) {
  TrainConfig c;
  c.w = cfg.get_double(prefix + "w", c.w);
  c.gamma = cfg.get_doubles(prefix + "gamma", {});
  c.batch_size = static_cast<int>(cfg.get_int(prefix + "batch_size", c.batch_size));
  c.iterations = static_cast<int>(cfg.get_int(prefix + "iterations", c.iterations));
  c.learning_rate = cfg.get_double(prefix + "learning_rate", c.learning_rate);
  c.momentum = cfg.get_double(prefix + "momentum", c.momentum);
  c.beta2 = cfg.get_double(prefix + "beta2", c.beta2);
  const std::string opt = cfg.get_string(prefix + "optimizer", "adam");
  if (opt == "sgd_momentum") {
    c.optimizer = Optimizer::kSgdMomentum;
  } else if (opt == "adam") {
    c.optimizer = Optimizer::kAdam;
  } else {
    throw ValidationError("unknown optimizer '" + opt + "'");
  }
  c.seed = static_cast<std::uint64_t>(cfg.get_int(prefix + "seed", static_cast<long long>(c.seed)));
  c.arch.height = static_cast<int>(cfg.get_int(prefix + "height", c.arch.height));
  c.arch.width = static_cast<int>(cfg.get_int(prefix + "width", c.arch.width));
  c.arch.time_dim = static_cast<int>(cfg.get_int(prefix + "time_dim", c.arch.time_dim));
  const auto widths = cfg.get_doubles(prefix + "widths", {});
  if (!widths.empty()) {
    c.arch.widths.clear();
    for (double w : widths) c.arch.widths.push_back(static_cast<int>(w));
  }
  return c;
}

TrainSample TrainSample::make(Image mu, Image x0) {
  if (mu.rows() != x0.rows() || mu.cols() != x0.cols()) throw ShapeMismatch("TrainSample: mu and x0 differ in shape");
  TrainSample s{std::move(mu), std::move(x0), {}};
  s.masks = mask_of(s.x0);
  return s;
}

Image ideal_prev_state(const Image& x0, const Image& x_i, const Image& mu, const NoiseSchedule& sched, int i) {
  if (i < 1 || i > sched.steps()) throw ValidationError("ideal_prev_state: step out of range");
  if (i == 1) return x0;  // the posterior collapses onto the known endpoint
  const double lam2 = sched.lambda() * sched.lambda();
  const double a = std::exp(-(sched.theta_bar(i) - sched.theta_bar(i - 1)));  // one-step decay
  const double q = lam2 * -std::expm1(-2.0 * (sched.theta_bar(i) - sched.theta_bar(i - 1)));  // one-step variance
  const double v_prev = sched.variance(i - 1);
  const Marginal prev = marginal(x0, mu, sched, i - 1);
  const double denom = a * a * v_prev + q;
  return mu + (v_prev * a * (x_i - mu) + q * (prev.mean - mu)) / denom;
}

Image reversed_prev_state(const Image& x_i, const Image& mu, const NoiseSchedule& sched, int i, const Image& eps_hat) {
  const Image score = -eps_hat / std::sqrt(sched.variance(i));
  Rng unused(0);
  return reverse_step(x_i, mu, sched, i, score, unused, /*stochastic=*/false);
}

LossTerms masked_objective(const Image& residual, const Masks& masks, double w, double gamma) {
  const double n_target = masks.target.sum();
  const double n_blank = masks.blank.sum();
  const Image abs_r = residual.abs();
  LossTerms out;
  out.j_target = n_target > 0 ? (masks.target * abs_r).sum() / n_target : 0.0;
  out.j_blank = n_blank > 0 ? (masks.blank * abs_r).sum() / n_blank : 0.0;
  out.loss = gamma * (out.j_target + w * out.j_blank);
  const double target_scale = n_target > 0 ? 1.0 / n_target : 0.0;
  const double blank_scale = n_blank > 0 ? w / n_blank : 0.0;
  const Image weight = target_scale * masks.target + blank_scale * masks.blank;
  out.grad_residual = gamma * weight * residual.sign();
  return out;
}

namespace {

struct Draw {
  Image x_i;
  Image ideal;
};

Draw draw_state(const TrainSample& sample, const NoiseSchedule& sched, int i, Rng& rng) {
  ForwardSample fs = forward_sample(sample.x0, sample.mu, sched, i, rng);
  Image ideal = ideal_prev_state(sample.x0, fs.state, sample.mu, sched, i);
  return {std::move(fs.state), std::move(ideal)};
}

}  // namespace

LossTerms evaluate_masked_loss(const TrainSample& sample, const NoiseSchedule& sched, const ScoreModel& model, int i,
                               Rng& rng, const TrainConfig& cfg) {
  const Draw d = draw_state(sample, sched, i, rng);
  const Image eps_hat = model.predict(d.x_i, sample.mu, i);
  const Image r = reversed_prev_state(d.x_i, sample.mu, sched, i, eps_hat) - d.ideal;
  return masked_objective(r, sample.masks, cfg.w, cfg.gamma_at(i));
}

LossWithGradient masked_loss(const TrainSample& sample, const NoiseSchedule& sched, const DenoiserModel& model, int i,
                             Rng& rng, const TrainConfig& cfg) {
  const Draw d = draw_state(sample, sched, i, rng);
  ForwardContext ctx;
  const Image eps_hat = model.forward(d.x_i, sample.mu, i, &ctx);
  const Image r = reversed_prev_state(d.x_i, sample.mu, sched, i, eps_hat) - d.ideal;
  LossWithGradient out;
  out.terms = masked_objective(r, sample.masks, cfg.w, cfg.gamma_at(i));
  // reversed = x_i - theta (mu - x_i) dt - sigma^2 dt eps_hat / sqrt(v_i)
  const double dr_deps = -sched.sigma(i) * sched.sigma(i) * sched.dt() / std::sqrt(sched.variance(i));
  out.gradient = model.backward(ctx, out.terms.grad_residual * dr_deps);
  return out;
}

TrainResult train(const std::vector<TrainSample>& dataset, const NoiseSchedule& sched, const TrainConfig& cfg,
                  const TrainCallback& on_iteration) {
  if (dataset.empty()) throw ValidationError("train: dataset is empty");
  cfg.validate(sched);
  for (const auto& s : dataset) {
    if (s.x0.rows() != cfg.arch.height || s.x0.cols() != cfg.arch.width) {
      throw ShapeMismatch("train: sample size disagrees with the architecture");
    }
  }
  TrainResult result{DenoiserModel(cfg.arch, cfg.seed), {}};
  DenoiserModel& model = result.model;
  Rng rng(cfg.seed ^ 0x5eed5eed5eedULL);
  std::uniform_int_distribution<std::size_t> pick_sample(0, dataset.size() - 1);
  std::uniform_int_distribution<int> pick_step(1, sched.steps());
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(model.parameter_count());
  Eigen::VectorXd second = Eigen::VectorXd::Zero(model.parameter_count());
  result.trace.reserve(static_cast<std::size_t>(cfg.iterations));

  for (int it = 1; it <= cfg.iterations; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.parameter_count());
    LossRecord rec{it, 0.0, 0.0, 0.0};
    for (int b = 0; b < cfg.batch_size; ++b) {
      const TrainSample& sample = dataset[pick_sample(rng)];
      const int i = pick_step(rng);
      const LossWithGradient lg = masked_loss(sample, sched, model, i, rng, cfg);
      grad += lg.gradient;
      rec.loss += lg.terms.loss;
      rec.j_target += lg.terms.j_target;
      rec.j_blank += lg.terms.j_blank;
    }
    const double inv = 1.0 / cfg.batch_size;
    grad *= inv;
    rec.loss *= inv;
    rec.j_target *= inv;
    rec.j_blank *= inv;
    if (!std::isfinite(rec.loss) || !grad.allFinite()) {
      throw DivergenceError("train: non-finite loss or gradient at iteration " + std::to_string(it));
    }
    if (cfg.optimizer == Optimizer::kAdam) {
      velocity = cfg.momentum * velocity + (1 - cfg.momentum) * grad;
      second = cfg.beta2 * second + (1 - cfg.beta2) * grad.cwiseAbs2();
      const double c1 = 1 - std::pow(cfg.momentum, it), c2 = 1 - std::pow(cfg.beta2, it);
      model.parameters().array() -=
          cfg.learning_rate * (velocity.array() / c1) / ((second.array() / c2).sqrt() + 1e-8);
    } else {
      velocity = cfg.momentum * velocity + grad;
      model.parameters() -= cfg.learning_rate * velocity;
    }
    result.trace.push_back(rec);
    if (on_iteration) on_iteration(rec);
  }
  return result;
}

std::vector<double> smooth(const std::vector<double>& values, std::size_t window) {
  std::vector<double> out(values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += values[i];
    if (i >= window) acc -= values[i - window];
    out[i] = acc / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

void write_loss_trace(const std::filesystem::path& path, const std::vector<LossRecord>& trace) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  os << "iteration,loss,J_target,J_blank\n" << std::setprecision(17);
  for (const auto& r : trace) os << r.iteration << ',' << r.loss << ',' << r.j_target << ',' << r.j_blank << '\n';
}

}  // namespace radarsr
