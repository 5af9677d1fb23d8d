#pragma once

// Central finite-difference check of DenoiserModel::backward.

#include <algorithm>
#include <cmath>
#include <random>

#include "radarsr/score_model.hpp"

namespace radarsr::gradcheck {

struct GradCheckReport {
  int checked = 0;
  int failed = 0;
  double worst = 0.0;
};

/// Randomizes every parameter (the output layer starts at zero otherwise) so
/// that all paths carry gradient.
inline DenoiserModel randomized_denoiser(const DenoiserArch& arch, std::uint64_t seed, double scale = 0.3) {
  DenoiserModel model(arch, seed);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (Eigen::Index i = 0; i < model.parameter_count(); ++i) model.parameters()[i] = u(rng);
  return model;
}

/// Loss L = sum(upstream .* forward(x, mu, t)). Relative error is
/// |a - n| / max(|a|, |n|, floor) so parameters with vanishing gradient are
/// judged on absolute error.
inline GradCheckReport check_gradients(DenoiserModel model, const Image& x, const Image& mu, int t,
                                       const Image& upstream, int samples, std::uint64_t seed,
                                       double h = 1e-4, double tol = 1e-4, double floor = 1e-6) {
  ForwardContext ctx;
  model.forward(x, mu, t, &ctx);
  const Eigen::VectorXd analytic = model.backward(ctx, upstream);
  auto loss = [&] { return (model.forward(x, mu, t) * upstream).sum(); };

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, model.parameter_count() - 1);
  GradCheckReport report;
  for (int s = 0; s < samples; ++s) {
    const Eigen::Index i = pick(rng);
    const double saved = model.parameters()[i];
    model.parameters()[i] = saved + h;
    const double up = loss();
    model.parameters()[i] = saved - h;
    const double down = loss();
    model.parameters()[i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double rel = std::abs(analytic[i] - numeric) / std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    report.worst = std::max(report.worst, rel);
    ++report.checked;
    if (!(rel < tol)) ++report.failed;
  }
  return report;
}

}  // namespace radarsr::gradcheck
