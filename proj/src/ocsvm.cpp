#include <algorithm>
#include <cmath>
#include <limits>

#include "driftwatch/clustering.hpp"
#include "driftwatch/error.hpp"

namespace driftwatch::cluster {
namespace {

constexpr double kTau = 1e-12;

}  // namespace

OcsvmModel ocsvm_train(const Values& data, double nu, double gamma, double tol) {
  const Eigen::Index n = data.size();
  require(n >= 2, "ocsvm_train needs at least two points");
  require(nu > 0.0 && nu <= 1.0, "ocsvm_train needs nu in (0, 1]");
  require(gamma > 0.0, "ocsvm_train needs gamma > 0");
  require(tol > 0.0, "ocsvm_train needs tol > 0");

  Eigen::MatrixXd q(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) q(i, j) = std::exp(-gamma * (data[i] - data[j]) * (data[i] - data[j]));

  // Feasible start: the first ⌊nu·n⌋ coefficients at the box bound, the
  // remainder of the unit mass on the next one.
  const double upper = 1.0 / (nu * static_cast<double>(n));
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  double left = 1.0;
  for (Eigen::Index i = 0; i < n && left > 0.0; ++i) {
    alpha[i] = std::min(upper, left);
    left -= alpha[i];
  }
  Eigen::VectorXd grad = q * alpha;

  OcsvmModel model;
  model.nu = nu;
  model.gamma = gamma;
  model.n_train = n;
  model.tol = tol;

  const int max_iter = static_cast<int>(std::max<Eigen::Index>(10000, 100 * n));
  for (int iter = 0; iter < max_iter; ++iter) {
    // Maximal violating pair: raise the coefficient with the smallest
    // gradient, lower the one with the largest.
    Eigen::Index up = -1, down = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (alpha[t] < upper && (up < 0 || grad[t] < grad[up])) up = t;
      if (alpha[t] > 0.0 && (down < 0 || grad[t] > grad[down])) down = t;
    }
    model.iterations = iter;
    if (up < 0 || down < 0 || grad[down] - grad[up] < tol) break;

    const double curvature = std::max(q(up, up) + q(down, down) - 2.0 * q(up, down), kTau);
    double step = (grad[down] - grad[up]) / curvature;
    step = std::min({step, upper - alpha[up], alpha[down]});
    alpha[up] += step;
    alpha[down] -= step;
    grad += step * (q.col(up) - q.col(down));
  }

  // rho: mean gradient over free coefficients, else the midpoint of the bounds
  // implied by the coefficients pinned at 0 and at the box limit.
  double free_sum = 0.0;
  int free_count = 0;
  double lower_bound = -std::numeric_limits<double>::infinity();
  double upper_bound = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (alpha[i] >= upper) lower_bound = std::max(lower_bound, grad[i]);
    else if (alpha[i] <= 0.0) upper_bound = std::min(upper_bound, grad[i]);
    else {
      free_sum += grad[i];
      ++free_count;
    }
  }
  model.rho = free_count > 0 ? free_sum / free_count : 0.5 * (lower_bound + upper_bound);

  const Eigen::Index sv = (alpha.array() > 0.0).count();
  model.alphas.resize(sv);
  model.support_values.resize(sv);
  for (Eigen::Index i = 0, k = 0; i < n; ++i) {
    if (alpha[i] <= 0.0) continue;
    model.alphas[k] = alpha[i];
    model.support_values[k] = data[i];
    ++k;
  }
  return model;
}

OcsvmPrediction ocsvm_predict(const OcsvmModel& model, const Values& data) {
  OcsvmPrediction out;
  out.decision.resize(data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const auto k = (-model.gamma * (model.support_values.array() - data[i]).square()).exp();
    out.decision[i] = (model.alphas.array() * k).sum() - model.rho;
  }
  out.inlier = out.decision.array() >= -std::max(model.tol, kDecisionTolerance);
  return out;
}

}  // namespace driftwatch::cluster
