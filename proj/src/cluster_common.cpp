#include <algorithm>
#include <unordered_map>
#include <vector>

#include "driftwatch/clustering.hpp"
#include "driftwatch/error.hpp"

namespace driftwatch::cluster {

int compact_labels(Labels& labels) {
  std::unordered_map<int, int> remap;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    int& l = labels[i];
    if (l == kNoise) continue;
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
    l = it->second;
  }
  return static_cast<int>(remap.size());
}

Eigen::VectorXd cluster_means(const Values& data, const Labels& labels, int n_clusters) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_clusters);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(n_clusters);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (labels[i] == kNoise) continue;
    sum[labels[i]] += data[i];
    count[labels[i]] += 1.0;
  }
  return sum.cwiseQuotient(count.cwiseMax(1.0));
}

Eigen::Index distinct_count(const Values& data) {
  std::vector<double> v(data.begin(), data.end());
  std::sort(v.begin(), v.end());
  return std::unique(v.begin(), v.end()) - v.begin();
}

double greedy_max(const Values& data) {
  require(data.size() > 0, "greedy_max needs at least one value");
  return data.maxCoeff();
}

}  // namespace driftwatch::cluster
