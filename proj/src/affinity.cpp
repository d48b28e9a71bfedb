#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "driftwatch/clustering.hpp"
#include "driftwatch/error.hpp"

namespace driftwatch::cluster {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::Index row_argmax(const Eigen::MatrixXd& m, Eigen::Index row, const std::vector<Eigen::Index>& cols) {
  Eigen::Index best = 0;
  for (std::size_t c = 1; c < cols.size(); ++c)
    if (m(row, cols[c]) > m(row, cols[best])) best = static_cast<Eigen::Index>(c);
  return best;
}

// Exemplar choice and labelling once the messages have settled.
AffinityResult assign_exemplars(const Eigen::MatrixXd& s, std::vector<Eigen::Index> exemplars) {
  const Eigen::Index n = s.rows();
  const auto k = static_cast<Eigen::Index>(exemplars.size());
  AffinityResult out;
  out.clusters.labels = Labels::Constant(n, kNoise);
  if (k == 0) {
    out.exemplars.resize(0);
    return out;
  }

  auto label_all = [&](Labels& c) {
    c.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) c[i] = static_cast<int>(row_argmax(s, i, exemplars));
    for (Eigen::Index e = 0; e < k; ++e) c[exemplars[e]] = static_cast<int>(e);
  };

  Labels c;
  label_all(c);
  // Re-elect each exemplar as the member with the highest total similarity to its cluster.
  for (Eigen::Index e = 0; e < k; ++e) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i)
      if (c[i] == e) members.push_back(i);
    double best = kNegInf;
    for (Eigen::Index j : members) {
      double total = 0.0;
      for (Eigen::Index i : members) total += s(i, j);
      if (total > best) {
        best = total;
        exemplars[e] = j;
      }
    }
  }
  label_all(c);

  // Cluster ids follow ascending exemplar index.
  std::vector<Eigen::Index> sorted = exemplars;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index ex = exemplars[c[i]];
    out.clusters.labels[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), ex) - sorted.begin());
  }
  out.clusters.n_clusters = static_cast<int>(sorted.size());
  out.exemplars.resize(out.clusters.n_clusters);
  for (std::size_t e = 0; e < sorted.size(); ++e) out.exemplars[static_cast<Eigen::Index>(e)] = static_cast<int>(sorted[e]);
  return out;
}

}  // namespace

double min_pairwise_similarity(const Values& data) {
  if (data.size() < 2) return 0.0;
  const double spread = data.maxCoeff() - data.minCoeff();
  return -spread * spread;
}

AffinityResult affinity_propagation(const Values& data, double preference, const AffinityOptions& options) {
  require(options.damping >= 0.5 && options.damping < 1.0, "affinity propagation needs damping in [0.5, 1)");
  require(options.max_iter >= 1, "affinity propagation needs max_iter >= 1");
  require(options.convergence_iter >= 1, "affinity propagation needs convergence_iter >= 1");
  const Eigen::Index n = data.size();
  require(n >= 1, "affinity propagation needs data");

  Eigen::MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) s(i, j) = -(data[i] - data[j]) * (data[i] - data[j]);
  s.diagonal().setConstant(preference);

  // Identical points: every off-diagonal similarity is 0, messages cannot break
  // the symmetry, so the outcome is decided by preference alone.
  if (n == 1 || distinct_count(data) == 1) {
    std::vector<Eigen::Index> ex;
    if (n == 1 || preference <= 0.0) ex.push_back(0);
    else for (Eigen::Index i = 0; i < n; ++i) ex.push_back(i);
    auto out = assign_exemplars(s, ex);
    out.converged = true;
    out.clusters.centroids = cluster_means(data, out.clusters.labels, out.clusters.n_clusters);
    return out;
  }

  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd tmp(n, n);
  Eigen::MatrixXi history = Eigen::MatrixXi::Zero(n, options.convergence_iter);
  const double keep = options.damping, take = 1.0 - options.damping;
  bool converged = false;
  int it = 0;

  for (; it < options.max_iter; ++it) {
    // Responsibilities: r(i,k) = s(i,k) - max_{k' != k} (a(i,k') + s(i,k')).
    tmp = a + s;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index arg = 0;
      double first = kNegInf, second = kNegInf;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double v = tmp(i, k);
        if (v > first) {
          second = first;
          first = v;
          arg = k;
        } else if (v > second) {
          second = v;
        }
      }
      for (Eigen::Index k = 0; k < n; ++k) tmp(i, k) = s(i, k) - (k == arg ? second : first);
    }
    r = keep * r + take * tmp;

    // Availabilities: a(i,k) = min(0, r(k,k) + Σ_{i' ∉ {i,k}} max(0, r(i',k))), a(k,k) = Σ_{i' != k} max(0, r(i',k)).
    tmp = r.cwiseMax(0.0);
    tmp.diagonal() = r.diagonal();
    const Eigen::RowVectorXd colsum = tmp.colwise().sum();
    for (Eigen::Index k = 0; k < n; ++k) {
      const double total = colsum[k];
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = total - tmp(i, k);
        tmp(i, k) = i == k ? v : std::min(v, 0.0);
      }
    }
    a = keep * a + take * tmp;

    int exemplar_count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool is_exemplar = a(i, i) + r(i, i) > 0.0;
      history(i, it % options.convergence_iter) = is_exemplar;
      exemplar_count += is_exemplar;
    }
    if (it >= options.convergence_iter) {
      const Eigen::VectorXi stable = history.rowwise().sum();
      const bool settled = ((stable.array() == 0) || (stable.array() == options.convergence_iter)).all();
      if (settled && exemplar_count > 0) {
        converged = true;
        ++it;
        break;
      }
    }
  }

  std::vector<Eigen::Index> exemplars;
  for (Eigen::Index i = 0; i < n; ++i)
    if (a(i, i) + r(i, i) > 0.0) exemplars.push_back(i);
  auto out = assign_exemplars(s, exemplars);
  out.converged = converged;
  out.iterations = it;
  out.clusters.centroids = cluster_means(data, out.clusters.labels, out.clusters.n_clusters);
  return out;
}

}  // namespace driftwatch::cluster
