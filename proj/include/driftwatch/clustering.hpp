#pragma once

// Clustering and novelty-detection engines over one-dimensional value sets.
//
// Every engine treats its input as an unordered set of throughput values with
// Euclidean (absolute-difference) distance. Results are deterministic for a
// given input order and seed; all ties resolve toward the lowest index or the
// smaller cluster count.

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

namespace driftwatch::cluster {

using Values = Eigen::Ref<const Eigen::VectorXd>;
using Labels = Eigen::VectorXi;

inline constexpr int kNoise = -1;

struct ClusterResult {
  Labels labels;               // per point, kNoise or in [0, n_clusters)
  int n_clusters = 0;
  Eigen::VectorXd centroids;   // per-cluster means; empty if the engine has none

  Eigen::Index noise_count() const { return (labels.array() == kNoise).count(); }
};

/// Renumbers non-noise labels to 0..k-1 in order of first appearance and returns k.
int compact_labels(Labels& labels);

/// Mean of the members of each cluster id in [0, n_clusters).
Eigen::VectorXd cluster_means(const Values& data, const Labels& labels, int n_clusters);

/// Number of distinct values, counting exact equality.
Eigen::Index distinct_count(const Values& data);

// ---------------------------------------------------------------- k-means --

struct KMeansOptions {
  int max_iter = 300;
  double tol = 0.0;  // stop when no centroid moves more than this
  std::uint64_t seed = 0;
  int n_init = 10;  // independent seedings; the lowest final inertia wins
};

struct KMeansResult {
  ClusterResult clusters;
  double inertia = 0.0;
  std::vector<double> inertia_trace;  // one entry per assignment step of the kept run
  int iterations = 0;
};

/// Lloyd iterations from k-means++ seeding, repeated `n_init` times from one
/// seeded stream; the first run with the lowest inertia is kept. Points
/// equidistant from two centroids join the lower-indexed one; clusters that
/// end up empty are dropped.
KMeansResult kmeans(const Values& data, int k, const KMeansOptions& options = {});

/// Mean silhouette coefficient. Requires non-negative labels and at least two
/// clusters; singleton points and a = b = 0 contribute 0.
double silhouette(const Values& data, const Labels& labels);

/// k in [k_min, k_max] maximizing the silhouette of `kmeans(data, k)`, first
/// maximum wins. k_max is clamped to n - 1 and to the number of distinct
/// values; data with fewer than three distinct values returns that count (≥ 1).
int best_k_silhouette(const Values& data, int k_min, int k_max, std::uint64_t seed);

// ----------------------------------------------------------------- DBSCAN --

/// Core point iff at least `min_pts` points (itself included) lie within `eps`.
/// Cluster ids follow the input order of the first core point reached.
ClusterResult dbscan(const Values& data, double eps, int min_pts);

// ----------------------------------------------------------------- OPTICS --

struct OpticsOptions {
  int min_samples = 4;
  double max_eps = std::numeric_limits<double>::infinity();
  int min_cluster_size = 4;
  double cut_quantile = 0.75;
};

struct ReachabilityProfile {
  Labels ordering;                 // visit order, a permutation of point indices
  Eigen::VectorXd reachability;    // indexed by point; +inf when unreached
  Eigen::VectorXd core_distance;   // indexed by point; +inf when not core
};

struct OpticsResult {
  ReachabilityProfile profile;
  ClusterResult clusters;
  double cut = std::numeric_limits<double>::infinity();
};

/// Reachability ordering plus a flat extraction: the profile is cut at the
/// `cut_quantile` of the finite reachability values, and every run of
/// consecutive points at or below the cut with at least `min_cluster_size`
/// members becomes a cluster. Everything else is noise.
OpticsResult optics(const Values& data, const OpticsOptions& options = {});

// -------------------------------------------------------------------- GMM --

struct GmmModel {
  Eigen::VectorXd weights;
  Eigen::VectorXd means;
  Eigen::VectorXd variances;
  std::vector<double> log_likelihood;  // one entry per E-step
  double variance_floor = 0.0;
  bool converged = false;

  int n_components() const { return static_cast<int>(weights.size()); }
};

struct GmmOptions {
  int max_iter = 200;
  double tol = 1e-8;
  std::uint64_t seed = 0;
};

/// EM for a 1-D Gaussian mixture initialised from k-means centroids. Variances
/// never drop below 1e-6·range² + 1e-12.
GmmModel gmm_fit(const Values& data, int n_components, const GmmOptions& options = {});

/// n × k posterior component probabilities; rows sum to one.
Eigen::MatrixXd gmm_responsibilities(const GmmModel& model, const Values& data);
double gmm_log_likelihood(const GmmModel& model, const Values& data);

/// Labels each point with its most probable component (lower index on ties).
ClusterResult gmm_assign(const GmmModel& model, const Values& data);

// ---------------------------------------------------------- agglomerative --

enum class Linkage { Single, Complete, Average };

std::string_view to_string(Linkage linkage);
Linkage linkage_from_string(std::string_view name);

/// Bottom-up merging of the closest pair of clusters while their linkage
/// distance is at most `distance_threshold`. Materializes the full n × n
/// distance matrix and rescans it after every merge.
ClusterResult agglomerative(const Values& data, double distance_threshold, Linkage linkage);

// --------------------------------------------------- affinity propagation --

struct AffinityOptions {
  double damping = 0.9;
  int max_iter = 500;
  int convergence_iter = 15;
};

struct AffinityResult {
  ClusterResult clusters;
  Labels exemplars;  // point index of each cluster's exemplar
  bool converged = false;
  int iterations = 0;
};

/// Message passing on s(i, j) = -(x_i - x_j)² with `preference` on the
/// diagonal. When no exemplar emerges every point is noise.
AffinityResult affinity_propagation(const Values& data, double preference,
                                    const AffinityOptions& options = {});

/// Smallest off-diagonal similarity, -(max - min)²; 0 for fewer than two points.
double min_pairwise_similarity(const Values& data);

// ---------------------------------------------------------- one-class SVM --

struct OcsvmModel {
  Eigen::VectorXd alphas;          // dual coefficients of the support vectors
  Eigen::VectorXd support_values;  // training values with alpha > 0
  double rho = 0.0;
  double gamma = 1.0;
  double nu = 0.1;
  Eigen::Index n_train = 0;
  int iterations = 0;
  double tol = 1e-4;  // KKT gap the solver stopped at
};

struct OcsvmPrediction {
  Eigen::VectorXd decision;
  Eigen::Array<bool, Eigen::Dynamic, 1> inlier;

  double outlier_fraction() const {
    return inlier.size() ? static_cast<double>((!inlier).count()) / static_cast<double>(inlier.size()) : 0.0;
  }
};

/// Floor of the inlier margin, absorbing the rounding gap between the
/// solver's gradient and a fresh kernel sum.
inline constexpr double kDecisionTolerance = 1e-9;

/// Solves min ½ αᵀKα s.t. 0 ≤ α_i ≤ 1/(nu·n), Σα = 1 with an RBF kernel
/// exp(-gamma·(x - y)²) by maximal-violating-pair coordinate descent until the
/// KKT gap falls below `tol`.
OcsvmModel ocsvm_train(const Values& data, double nu, double gamma, double tol = 1e-4);

/// f(x) = Σ α_i k(s_i, x) - rho; inlier iff f(x) ≥ -max(model.tol,
/// kDecisionTolerance). A solution within `tol` of optimal only places points
/// with α at the box limit further below zero, so at most nu·n training points
/// are outliers.
OcsvmPrediction ocsvm_predict(const OcsvmModel& model, const Values& data);

// ------------------------------------------------------------------ greedy --

double greedy_max(const Values& data);

}  // namespace driftwatch::cluster
