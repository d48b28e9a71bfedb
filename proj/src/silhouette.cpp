#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "driftwatch/clustering.hpp"
#include "driftwatch/error.hpp"

namespace driftwatch::cluster {

double silhouette(const Values& data, const Labels& labels) {
  const Eigen::Index n = data.size();
  require(labels.size() == n, "silhouette: labels and data differ in length");
  require(n >= 2, "silhouette needs at least two points");
  require((labels.array() >= 0).all(), "silhouette: noise labels are not allowed");

  const int k = labels.maxCoeff() + 1;
  Eigen::VectorXd sizes = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < n; ++i) sizes[labels[i]] += 1.0;
  require((sizes.array() > 0.0).count() >= 2, "silhouette needs at least two clusters");

  double total = 0.0;
  Eigen::VectorXd dist_sum(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = labels[i];
    if (sizes[own] <= 1.0) continue;
    dist_sum.setZero();
    for (Eigen::Index j = 0; j < n; ++j) dist_sum[labels[j]] += std::abs(data[i] - data[j]);
    const double a = dist_sum[own] / (sizes[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c)
      if (c != own && sizes[c] > 0.0) b = std::min(b, dist_sum[c] / sizes[c]);
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

int best_k_silhouette(const Values& data, int k_min, int k_max, std::uint64_t seed) {
  require(data.size() > 0, "best_k_silhouette needs data");
  const Eigen::Index distinct = distinct_count(data);
  if (distinct < 3) return static_cast<int>(std::max<Eigen::Index>(distinct, 1));

  const int lo = std::max(k_min, 2);
  const int hi = static_cast<int>(std::min<Eigen::Index>({Eigen::Index{k_max}, data.size() - 1, distinct}));
  if (lo > hi) return std::max(hi, 1);

  int best_k = lo;
  double best_score = -std::numeric_limits<double>::infinity();
  KMeansOptions opts;
  opts.seed = seed;
  for (int k = lo; k <= hi; ++k) {
    const auto fit = kmeans(data, k, opts);
    if (fit.clusters.n_clusters < 2) continue;
    const double score = silhouette(data, fit.clusters.labels);
    if (score > best_score) {
      best_score = score;
      best_k = k;
    }
  }
  return best_k;
}

}  // namespace driftwatch::cluster
