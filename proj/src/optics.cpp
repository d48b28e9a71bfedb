#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "driftwatch/clustering.hpp"
#include "driftwatch/error.hpp"

namespace driftwatch::cluster {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double linear_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

OpticsResult optics(const Values& data, const OpticsOptions& options) {
  require(options.min_samples >= 2, "optics needs min_samples >= 2");
  require(options.max_eps > 0.0, "optics needs max_eps > 0");
  require(options.min_cluster_size >= 2, "optics needs min_cluster_size >= 2");
  require(options.cut_quantile >= 0.0 && options.cut_quantile <= 1.0, "optics cut_quantile must lie in [0, 1]");

  const Eigen::Index n = data.size();
  OpticsResult result;
  auto& profile = result.profile;
  profile.ordering.resize(n);
  profile.reachability = Eigen::VectorXd::Constant(n, kInf);
  profile.core_distance = Eigen::VectorXd::Constant(n, kInf);

  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (n < options.min_samples) break;
    for (Eigen::Index j = 0; j < n; ++j) dist[j] = std::abs(data[i] - data[j]);
    auto kth = dist.begin() + (options.min_samples - 1);
    std::nth_element(dist.begin(), kth, dist.end());
    if (*kth <= options.max_eps) profile.core_distance[i] = *kth;
  }

  std::vector<bool> processed(static_cast<std::size_t>(n), false);
  Eigen::Index visited = 0;
  auto expand_from = [&](Eigen::Index p) {
    processed[p] = true;
    profile.ordering[visited++] = static_cast<int>(p);
    const double core = profile.core_distance[p];
    if (!std::isfinite(core)) return;
    for (Eigen::Index o = 0; o < n; ++o) {
      if (processed[o]) continue;
      const double d = std::abs(data[p] - data[o]);
      if (d > options.max_eps) continue;
      profile.reachability[o] = std::min(profile.reachability[o], std::max(core, d));
    }
  };

  for (Eigen::Index start = 0; start < n; ++start) {
    if (processed[start]) continue;
    expand_from(start);
    for (;;) {
      Eigen::Index next = -1;
      for (Eigen::Index o = 0; o < n; ++o)
        if (!processed[o] && std::isfinite(profile.reachability[o]) &&
            (next < 0 || profile.reachability[o] < profile.reachability[next]))
          next = o;
      if (next < 0) break;
      expand_from(next);
    }
  }

  std::vector<double> finite;
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::isfinite(profile.reachability[i])) finite.push_back(profile.reachability[i]);

  auto& clusters = result.clusters;
  clusters.labels = Labels::Constant(n, kNoise);
  if (!finite.empty()) {
    result.cut = linear_quantile(std::move(finite), options.cut_quantile);
    std::vector<int> run;
    auto close_run = [&] {
      if (static_cast<int>(run.size()) >= options.min_cluster_size) {
        for (int p : run) clusters.labels[p] = clusters.n_clusters;
        ++clusters.n_clusters;
      }
      run.clear();
    };
    for (Eigen::Index r = 0; r < n; ++r) {
      const int p = profile.ordering[r];
      if (profile.reachability[p] <= result.cut) run.push_back(p);
      else close_run();
    }
    close_run();
  }
  clusters.centroids = cluster_means(data, clusters.labels, clusters.n_clusters);
  return result;
}

}  // namespace driftwatch::cluster
