#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "driftwatch/clustering.hpp"
#include "driftwatch/error.hpp"

namespace driftwatch::cluster {

std::string_view to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::Single: return "single";
    case Linkage::Complete: return "complete";
    case Linkage::Average: return "average";
  }
  return "average";
}

Linkage linkage_from_string(std::string_view name) {
  for (auto l : {Linkage::Single, Linkage::Complete, Linkage::Average})
    if (to_string(l) == name) return l;
  throw Error("unknown linkage '" + std::string(name) + "'");
}

ClusterResult agglomerative(const Values& data, double distance_threshold, Linkage linkage) {
  require(distance_threshold > 0.0, "agglomerative needs distance_threshold > 0");
  const Eigen::Index n = data.size();

  // Slot i holds the cluster whose lowest member is i; merges fold the higher
  // slot into the lower one and update distances by Lance-Williams.
  Eigen::MatrixXd dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) dist(i, j) = std::abs(data[i] - data[j]);
  std::vector<Eigen::Index> size(static_cast<std::size_t>(n), 1);
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  Eigen::VectorXi owner = Eigen::VectorXi::LinSpaced(n, 0, static_cast<int>(n) - 1);

  for (Eigen::Index remaining = n; remaining > 1; --remaining) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index bi = -1, bj = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (active[j] && dist(i, j) < best) {
          best = dist(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0 || best > distance_threshold) break;

    const auto si = static_cast<double>(size[bi]), sj = static_cast<double>(size[bj]);
    for (Eigen::Index m = 0; m < n; ++m) {
      if (!active[m] || m == bi || m == bj) continue;
      double d = 0.0;
      switch (linkage) {
        case Linkage::Single: d = std::min(dist(bi, m), dist(bj, m)); break;
        case Linkage::Complete: d = std::max(dist(bi, m), dist(bj, m)); break;
        case Linkage::Average: d = (si * dist(bi, m) + sj * dist(bj, m)) / (si + sj); break;
      }
      dist(bi, m) = dist(m, bi) = d;
    }
    size[bi] += size[bj];
    active[bj] = false;
    for (Eigen::Index p = 0; p < n; ++p)
      if (owner[p] == bj) owner[p] = static_cast<int>(bi);
  }

  ClusterResult result;
  result.labels = owner;
  result.n_clusters = compact_labels(result.labels);
  result.centroids = cluster_means(data, result.labels, result.n_clusters);
  return result;
}

}  // namespace driftwatch::cluster
