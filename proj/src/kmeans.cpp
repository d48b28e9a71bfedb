#include <cmath>
#include <limits>
#include <random>

#include "driftwatch/clustering.hpp"
#include "driftwatch/error.hpp"

namespace driftwatch::cluster {
namespace {

// k-means++: first centre uniform, the rest drawn with probability ∝ D².
Eigen::VectorXd seed_centroids(const Values& data, int k, std::mt19937_64& rng) {
  const Eigen::Index n = data.size();
  Eigen::VectorXd centroids(k);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  centroids[0] = data[pick(rng)];
  Eigen::VectorXd d2 = (data.array() - centroids[0]).square();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centroids[c] = data[chosen];
    d2 = d2.cwiseMin((data.array() - centroids[c]).square().matrix());
  }
  return centroids;
}

// Nearest centroid per point; returns the inertia of that assignment.
double assign(const Values& data, const Eigen::VectorXd& centroids, Labels& labels) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.size(); ++c) {
      const double d = (data[i] - centroids[c]) * (data[i] - centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[i] = best;
    inertia += best_d;
  }
  return inertia;
}

KMeansResult lloyd(const Values& data, int k, const KMeansOptions& options, std::mt19937_64& rng) {
  Eigen::VectorXd centroids = seed_centroids(data, k, rng);
  Labels labels(data.size());
  KMeansResult result;

  double inertia = assign(data, centroids, labels);
  result.inertia_trace.push_back(inertia);
  for (int iter = 0; iter < options.max_iter; ++iter) {
    result.iterations = iter + 1;
    // Empty clusters keep their previous centroid.
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(k), count = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      sum[labels[i]] += data[i];
      count[labels[i]] += 1.0;
    }
    Eigen::VectorXd updated = centroids;
    for (int c = 0; c < k; ++c)
      if (count[c] > 0.0) updated[c] = sum[c] / count[c];
    const double shift = (updated - centroids).cwiseAbs().maxCoeff();
    centroids = updated;

    Labels previous = labels;
    inertia = assign(data, centroids, labels);
    result.inertia_trace.push_back(inertia);
    if (labels == previous || shift <= options.tol) break;
  }

  result.clusters.labels = labels;
  result.clusters.n_clusters = compact_labels(result.clusters.labels);
  result.clusters.centroids = cluster_means(data, result.clusters.labels, result.clusters.n_clusters);
  result.inertia = ((data - result.clusters.centroids(result.clusters.labels)).array().square()).sum();
  return result;
}

}  // namespace

KMeansResult kmeans(const Values& data, int k, const KMeansOptions& options) {
  require(data.size() > 0, "kmeans needs data");
  require(k >= 1, "kmeans needs k >= 1");
  require(k <= data.size(), "kmeans needs k <= n");
  require(options.n_init >= 1, "kmeans needs n_init >= 1");

  std::mt19937_64 rng(options.seed);
  KMeansResult best = lloyd(data, k, options, rng);
  for (int run = 1; run < options.n_init; ++run) {
    auto next = lloyd(data, k, options, rng);
    if (next.inertia < best.inertia) best = std::move(next);
  }
  return best;
}

}  // namespace driftwatch::cluster
