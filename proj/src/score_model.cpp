#include "radarsr/score_model.hpp"

#include <cmath>

#include "radarsr/errors.hpp"

namespace radarsr {

Image OracleModel::predict(const Image& x_t, const Image& mu, int t) const {
  const Marginal m = marginal(x0_, mu, sched_, t);
  if (!(m.variance > 0)) throw DegenerateVariance("oracle: v_t is zero at t = " + std::to_string(t));
  if (x_t.rows() != mu.rows() || x_t.cols() != mu.cols()) throw ShapeMismatch("oracle: shape mismatch");
  return (x_t - m.mean) / std::sqrt(m.variance);
}

Eigen::VectorXd time_embedding(double t, int dim) {
  if (dim <= 0 || dim % 2 != 0) throw ValidationError("time_embedding: dim must be positive and even");
  Eigen::VectorXd e(dim);
  for (int k = 0; k < dim / 2; ++k) {
    const double freq = std::pow(10000.0, -2.0 * k / dim);
    e[2 * k] = std::sin(t * freq);
    e[2 * k + 1] = std::cos(t * freq);
  }
  return e;
}

}  // namespace radarsr
