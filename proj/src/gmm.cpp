#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "driftwatch/clustering.hpp"
#include "driftwatch/error.hpp"

namespace driftwatch::cluster {
namespace {

// n × k matrix of log(w_c) + log N(x_i | μ_c, v_c).
Eigen::MatrixXd log_joint(const GmmModel& m, const Values& data) {
  const Eigen::Index n = data.size(), k = m.weights.size();
  Eigen::MatrixXd lj(n, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const double norm = std::log(m.weights[c]) - 0.5 * std::log(2.0 * std::numbers::pi * m.variances[c]);
    lj.col(c) = (norm - (data.array() - m.means[c]).square() / (2.0 * m.variances[c])).matrix();
  }
  return lj;
}

// Row-wise log-sum-exp; normalizes `lj` into responsibilities in place.
double normalize_rows(Eigen::MatrixXd& lj) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < lj.rows(); ++i) {
    const double peak = lj.row(i).maxCoeff();
    auto shifted = (lj.row(i).array() - peak).exp();
    const double sum = shifted.sum();
    total += peak + std::log(sum);
    lj.row(i) = shifted / sum;
  }
  return total;
}

}  // namespace

GmmModel gmm_fit(const Values& data, int n_components, const GmmOptions& options) {
  const Eigen::Index n = data.size();
  require(n > 0, "gmm_fit needs data");
  require(n_components >= 1, "gmm_fit needs at least one component");
  require(n_components <= n, "gmm_fit needs n_components <= n");

  const int k = n_components;
  const double range = data.maxCoeff() - data.minCoeff();
  GmmModel model;
  model.variance_floor = 1e-6 * range * range + 1e-12;

  KMeansOptions km;
  km.seed = options.seed;
  const auto init = kmeans(data, k, km);
  model.means.resize(k);
  model.means.head(init.clusters.n_clusters) = init.clusters.centroids;
  // k-means can merge duplicates; pad with evenly spaced data quantiles.
  if (init.clusters.n_clusters < k) {
    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    for (int c = init.clusters.n_clusters; c < k; ++c)
      model.means[c] = sorted[static_cast<std::size_t>((c + 1) * (n - 1) / (k + 1))];
  }
  const double var = (data.array() - data.mean()).square().mean();
  model.variances = Eigen::VectorXd::Constant(k, std::max(var, model.variance_floor));
  model.weights = Eigen::VectorXd::Constant(k, 1.0 / k);

  double previous = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iter; ++iter) {
    Eigen::MatrixXd resp = log_joint(model, data);
    const double ll = normalize_rows(resp);
    model.log_likelihood.push_back(ll);
    if (iter > 0 && std::abs(ll - previous) < options.tol) {
      model.converged = true;
      break;
    }
    previous = ll;

    const Eigen::VectorXd mass = resp.colwise().sum().transpose();
    for (int c = 0; c < k; ++c) {
      if (mass[c] <= 0.0) continue;  // keep a collapsed component where it is
      model.means[c] = resp.col(c).dot(data) / mass[c];
      const double v = resp.col(c).dot((data.array() - model.means[c]).square().matrix()) / mass[c];
      model.variances[c] = std::max(v, model.variance_floor);
    }
    model.weights = mass / mass.sum();
  }
  return model;
}

Eigen::MatrixXd gmm_responsibilities(const GmmModel& model, const Values& data) {
  Eigen::MatrixXd lj = log_joint(model, data);
  normalize_rows(lj);
  return lj;
}

double gmm_log_likelihood(const GmmModel& model, const Values& data) {
  Eigen::MatrixXd lj = log_joint(model, data);
  return normalize_rows(lj);
}

ClusterResult gmm_assign(const GmmModel& model, const Values& data) {
  const Eigen::MatrixXd lj = log_joint(model, data);
  ClusterResult result;
  result.labels.resize(data.size());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < lj.cols(); ++c)
      if (lj(i, c) > lj(i, best)) best = c;
    result.labels[i] = static_cast<int>(best);
  }
  // Centroids stay the component means; ids are compacted over the used ones.
  std::vector<int> used;
  for (Eigen::Index c = 0; c < lj.cols(); ++c)
    if ((result.labels.array() == c).any()) used.push_back(static_cast<int>(c));
  Eigen::VectorXi remap = Eigen::VectorXi::Constant(lj.cols(), kNoise);
  for (std::size_t u = 0; u < used.size(); ++u) remap[used[u]] = static_cast<int>(u);
  for (Eigen::Index i = 0; i < data.size(); ++i) result.labels[i] = remap[result.labels[i]];
  result.n_clusters = static_cast<int>(used.size());
  result.centroids.resize(result.n_clusters);
  for (std::size_t u = 0; u < used.size(); ++u) result.centroids[static_cast<Eigen::Index>(u)] = model.means[used[u]];
  return result;
}

}  // namespace driftwatch::cluster
