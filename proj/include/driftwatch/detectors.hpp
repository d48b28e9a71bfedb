#pragma once

// Drift detectors: learn a reference from a fulfillment-period batch, judge a
// fresh batch against it, and return a verdict.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "driftwatch/clustering.hpp"
#include "driftwatch/telemetry.hpp"

namespace driftwatch::detect {

enum class ModelType { AffinityPropagation, Dbscan, Gmm, Hierarchical, KMeans, Optics, OneClassSvm, Greedy };

inline constexpr std::array<ModelType, 8> kAllModels = {
    ModelType::AffinityPropagation, ModelType::Dbscan, ModelType::Gmm,         ModelType::Hierarchical,
    ModelType::KMeans,              ModelType::Optics, ModelType::OneClassSvm, ModelType::Greedy};

/// Lowercase CLI names: affinity, dbscan, gmm, hierarchical, kmeans, optics, ocsvm, greedy.
std::string_view to_string(ModelType model);
ModelType model_from_string(std::string_view name);

/// True for the models whose rule compares cluster counts.
constexpr bool counts_clusters(ModelType m) {
  return m == ModelType::AffinityPropagation || m == ModelType::Dbscan || m == ModelType::Hierarchical ||
         m == ModelType::Optics;
}

/// Which values a cluster-count model re-clusters at evaluation time.
///
/// `Union` clusters the training values together with the test values not
/// already present in training, so a batch that sits at a new level forms a
/// cluster of its own. `Test` clusters the test batch alone.
enum class ClusterScope { Union, Test };

std::string_view to_string(ClusterScope scope);
ClusterScope cluster_scope_from_string(std::string_view name);

struct DetectorConfig {
  ModelType model = ModelType::Dbscan;
  double multiplier = 2.0;     // K-Means/GMM gap ratio
  double ap_multiplier = 1.0;  // AP: drift iff k_test > ceil(ap_multiplier · k_train)
  double margin = 0.25;        // Greedy
  int min_pts = 4;             // DBSCAN
  double eps_factor = 1.5;     // DBSCAN: eps = eps_factor · std(train)
  double threshold_fraction = 0.1;  // Hierarchical: threshold = fraction · mean(train)
  cluster::Linkage linkage = cluster::Linkage::Average;
  int min_samples = 4;         // OPTICS
  int min_cluster_size = 4;
  double max_eps = std::numeric_limits<double>::infinity();
  double cut_quantile = 0.75;
  double nu = 0.1;             // OCSVM
  std::optional<double> gamma_override;
  int k_max = 8;               // silhouette search bound, further clamped to n - 1
  double gap_floor_fraction = 1e-6;  // K-Means/GMM floor when the training gap is 0
  double ap_damping = 0.9;
  int ap_max_iter = 500;
  int ap_convergence_iter = 15;
  ClusterScope cluster_scope = ClusterScope::Union;
  std::uint64_t seed = 0;
};

/// Throws PreconditionError on out-of-range fields.
void validate(const DetectorConfig& config);

void to_json(nlohmann::json& j, const DetectorConfig& c);
/// Missing fields keep their defaults; the result is validated.
void from_json(const nlohmann::json& j, DetectorConfig& c);

// Per-model artifacts saved by fit.

struct CountState {
  double parameter = 0.0;     // AP preference, DBSCAN eps, or hierarchical threshold; unused by OPTICS
  int k_train = 0;
  Eigen::VectorXd reference;  // training values, kept for union scope
  Eigen::VectorXd sorted_reference;
};

struct GapState {
  int k_train = 0;
  double old_max_gap = 0.0;
  double gap_floor = 0.0;
};

struct GmmState {
  cluster::GmmModel model;
  double old_max_gap = 0.0;
  double gap_floor = 0.0;
};

struct OcsvmState {
  cluster::OcsvmModel model;
};

struct GreedyState {
  double monitoring_max = 0.0;
};

struct DetectorState {
  ModelType model = ModelType::Dbscan;
  std::variant<CountState, GapState, GmmState, OcsvmState, GreedyState> artifacts;
};

struct DriftVerdict {
  ModelType model = ModelType::Dbscan;
  bool drift = false;
  /// Cluster-count models: k_test - k_allowed. K-Means/GMM: new gap over the
  /// drift threshold. OCSVM: test outlier fraction. Greedy: test max over the
  /// monitoring max.
  double score = 0.0;
  std::string detail;

  friend bool operator==(const DriftVerdict&, const DriftVerdict&) = default;
};

DetectorState fit(const DetectorConfig& config, const telemetry::Batch& x_train);
DriftVerdict evaluate(const DetectorState& state, const DetectorConfig& config, const telemetry::Batch& x_test);
DriftVerdict detect(const DetectorConfig& config, const telemetry::Batch& x_train, const telemetry::Batch& x_test);

/// Largest gap between neighbouring sorted centroids; 0 for fewer than two.
double max_neighbour_gap(Eigen::VectorXd centroids);

/// {model, drift, score, detail, t_start, t_end, elapsed_ms}.
nlohmann::json verdict_json(const DriftVerdict& verdict, const telemetry::Batch& batch, double elapsed_ms);

}  // namespace driftwatch::detect
