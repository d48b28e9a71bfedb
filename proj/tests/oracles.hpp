#pragma once

// Slow, obviously-correct reference implementations used to check the engines.
// They share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Part = std::vector<int>;

/// Relabels non-negative ids to 0, 1, ... in order of first appearance; -1 stays.
inline Part canonical(const Part& labels) {
  std::map<int, int> ids;
  Part out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      out[i] = -1;
      continue;
    }
    auto [it, fresh] = ids.emplace(labels[i], static_cast<int>(ids.size()));
    out[i] = it->second;
  }
  return out;
}

/// DBSCAN by definition: core points are those with at least min_pts points
/// (themselves included) within eps; clusters are connected components of the
/// core graph; a border point joins the adjacent cluster whose smallest core
/// index is smallest.
inline Part dbscan(const Vec& x, double eps, int min_pts) {
  const std::size_t n = x.size();
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) count += std::abs(x[i] - x[j]) <= eps;
    core[i] = count >= min_pts;
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (core[i] && core[j] && std::abs(x[i] - x[j]) <= eps) parent[std::max(find(i), find(j))] = std::min(find(i), find(j));

  // Roots are the smallest index in each component, so a component's id is its
  // smallest core index.
  Part labels(n, -1);
  for (std::size_t i = 0; i < n; ++i)
    if (core[i]) labels[i] = static_cast<int>(find(i));
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = -1;
    for (std::size_t j = 0; j < n; ++j)
      if (core[j] && std::abs(x[i] - x[j]) <= eps && (best < 0 || labels[j] < best)) best = labels[j];
    labels[i] = best;
  }
  return canonical(labels);
}

inline double sse(const Vec& x, const std::vector<std::size_t>& members) {
  if (members.empty()) return 0.0;
  double mean = 0.0;
  for (auto i : members) mean += x[i];
  mean /= static_cast<double>(members.size());
  double s = 0.0;
  for (auto i : members) s += (x[i] - mean) * (x[i] - mean);
  return s;
}

/// Smallest within-cluster sum of squares over every split into two non-empty groups.
inline double best_two_partition_inertia(const Vec& x) {
  const std::size_t n = x.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << (n - 1)); ++mask) {
    std::vector<std::size_t> a, b;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? a : b).push_back(i);
    best = std::min(best, sse(x, a) + sse(x, b));
  }
  return best;
}

/// Mean silhouette with per-point member lists.
inline double silhouette(const Vec& x, const Part& labels) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < x.size(); ++i) groups[labels[i]].push_back(i);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& own = groups[labels[i]];
    if (own.size() == 1) continue;
    double a = 0.0;
    for (auto j : own) a += std::abs(x[i] - x[j]);
    a /= static_cast<double>(own.size() - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [id, members] : groups) {
      if (id == labels[i]) continue;
      double d = 0.0;
      for (auto j : members) d += std::abs(x[i] - x[j]);
      b = std::min(b, d / static_cast<double>(members.size()));
    }
    if (std::max(a, b) > 0.0) total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(x.size());
}

enum class Link { Single, Complete, Average };

/// Agglomerative clustering recomputing every linkage distance from the member
/// lists. Clusters are identified by their smallest member; ties go to the
/// lexicographically smallest pair of identifiers.
inline Part agglomerative(const Vec& x, double threshold, Link link) {
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < x.size(); ++i) clusters.push_back({i});
  auto linkage = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
    for (auto i : a)
      for (auto j : b) {
        const double d = std::abs(x[i] - x[j]);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        sum += d;
      }
    if (link == Link::Single) return lo;
    if (link == Link::Complete) return hi;
    return sum / static_cast<double>(a.size() * b.size());
  };
  while (clusters.size() > 1) {
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        const double d = linkage(clusters[i], clusters[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    if (!(best <= threshold)) break;
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  Part labels(x.size());
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (auto i : clusters[c]) labels[i] = static_cast<int>(c);
  return canonical(labels);
}

/// Affinity propagation written as the textbook update rules with scalar loops.
/// Returns the exemplar index of every point, or an empty vector when no
/// exemplar emerges.
inline std::vector<std::size_t> affinity_exemplars(const Vec& x, double preference, double damping, int max_iter,
                                                   int convergence_iter) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> s(n, std::vector<double>(n)), r = s, a = s;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) s[i][k] = i == k ? preference : -(x[i] - x[k]) * (x[i] - x[k]);

  std::vector<std::vector<bool>> history;
  auto exemplar_set = [&] {
    std::vector<bool> e(n);
    for (std::size_t k = 0; k < n; ++k) e[k] = a[k][k] + r[k][k] > 0.0;
    return e;
  };
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t kk = 0; kk < n; ++kk)
          if (kk != k) m = std::max(m, a[i][kk] + s[i][kk]);
        r[i][k] = damping * r[i][k] + (1.0 - damping) * (s[i][k] - m);
      }
    auto a_new = a;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        double sum = 0.0;
        for (std::size_t ii = 0; ii < n; ++ii)
          if (ii != i && ii != k) sum += std::max(0.0, r[ii][k]);
        a_new[i][k] = i == k ? sum : std::min(0.0, r[k][k] + sum);
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) a[i][k] = damping * a[i][k] + (1.0 - damping) * a_new[i][k];

    history.push_back(exemplar_set());
    if (static_cast<int>(history.size()) > convergence_iter) {
      const auto& last = history.back();
      bool stable = std::any_of(last.begin(), last.end(), [](bool b) { return b; });
      for (int h = 1; h < convergence_iter && stable; ++h) stable = history[history.size() - 1 - h] == last;
      if (stable) break;
    }
  }

  std::vector<std::size_t> ex;
  const auto e = exemplar_set();
  for (std::size_t k = 0; k < n; ++k)
    if (e[k]) ex.push_back(k);
  if (ex.empty()) return {};
  auto nearest = [&](std::size_t i, const std::vector<std::size_t>& cands) {
    std::size_t best = cands.front();
    for (auto k : cands)
      if (s[i][k] > s[i][best]) best = k;
    return best;
  };
  // Assign, re-elect each cluster's exemplar as its most central member, reassign.
  std::vector<std::size_t> assign(n);
  for (std::size_t i = 0; i < n; ++i) assign[i] = std::find(ex.begin(), ex.end(), i) != ex.end() ? i : nearest(i, ex);
  std::vector<std::size_t> refined;
  for (auto k : ex) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (assign[i] == k) members.push_back(i);
    std::size_t best = members.front();
    double best_sum = -std::numeric_limits<double>::infinity();
    for (auto c : members) {
      double sum = 0.0;
      for (auto i : members) sum += i == c ? 0.0 : s[i][c];
      if (sum > best_sum) {
        best_sum = sum;
        best = c;
      }
    }
    refined.push_back(best);
  }
  std::sort(refined.begin(), refined.end());
  for (std::size_t i = 0; i < n; ++i)
    assign[i] = std::find(refined.begin(), refined.end(), i) != refined.end() ? i : nearest(i, refined);
  return assign;
}

/// Reproducible 1-D sample from a mixture of Gaussian blobs.
inline Vec blobs(std::mt19937_64& rng, std::size_t n, const Vec& centres, double spread) {
  std::normal_distribution<double> noise(0.0, spread);
  std::uniform_int_distribution<std::size_t> pick(0, centres.size() - 1);
  Vec out(n);
  for (auto& v : out) v = centres[pick(rng)] + noise(rng);
  return out;
}

}  // namespace oracle
