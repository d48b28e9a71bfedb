#include <cmath>
#include <deque>
#include <numeric>
#include <vector>

#include "driftwatch/clustering.hpp"
#include "driftwatch/error.hpp"

namespace driftwatch::cluster {
namespace {

// Neighbourhoods in 1-D are contiguous runs of the sorted order, so each query
// scans outward from the point's sorted position.
class SortedIndex {
 public:
  explicit SortedIndex(const Values& data) : data_(data), order_(data.size()), rank_(data.size()) {
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    std::stable_sort(order_.begin(), order_.end(), [&](Eigen::Index a, Eigen::Index b) { return data_[a] < data_[b]; });
    for (std::size_t r = 0; r < order_.size(); ++r) rank_[order_[r]] = static_cast<Eigen::Index>(r);
  }

  void neighbours(Eigen::Index i, double eps, std::vector<Eigen::Index>& out) const {
    out.clear();
    const double x = data_[i];
    const auto n = static_cast<Eigen::Index>(order_.size());
    for (Eigen::Index r = rank_[i]; r >= 0 && std::abs(data_[order_[r]] - x) <= eps; --r) out.push_back(order_[r]);
    for (Eigen::Index r = rank_[i] + 1; r < n && std::abs(data_[order_[r]] - x) <= eps; ++r) out.push_back(order_[r]);
  }

 private:
  const Values& data_;
  std::vector<Eigen::Index> order_;
  std::vector<Eigen::Index> rank_;
};

}  // namespace

ClusterResult dbscan(const Values& data, double eps, int min_pts) {
  require(eps > 0.0, "dbscan needs eps > 0");
  require(min_pts >= 1, "dbscan needs min_pts >= 1");

  const Eigen::Index n = data.size();
  const SortedIndex index(data);
  constexpr int kUnvisited = -2;
  Labels labels = Labels::Constant(n, kUnvisited);
  std::vector<Eigen::Index> hood, inner;
  std::deque<Eigen::Index> frontier;
  int cluster = 0;

  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] != kUnvisited) continue;
    index.neighbours(i, eps, hood);
    if (static_cast<int>(hood.size()) < min_pts) {
      labels[i] = kNoise;
      continue;
    }
    labels[i] = cluster;
    frontier.assign(hood.begin(), hood.end());
    while (!frontier.empty()) {
      const Eigen::Index j = frontier.front();
      frontier.pop_front();
      if (labels[j] == kNoise) labels[j] = cluster;  // border point
      if (labels[j] != kUnvisited) continue;
      labels[j] = cluster;
      index.neighbours(j, eps, inner);
      if (static_cast<int>(inner.size()) >= min_pts) frontier.insert(frontier.end(), inner.begin(), inner.end());
    }
    ++cluster;
  }

  ClusterResult result;
  result.labels = std::move(labels);
  result.n_clusters = cluster;
  result.centroids = cluster_means(data, result.labels, cluster);
  return result;
}

}  // namespace driftwatch::cluster
