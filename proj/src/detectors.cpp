#include "driftwatch/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "driftwatch/error.hpp"

namespace driftwatch::detect {
namespace {

using telemetry::Batch;

constexpr double kEpsFloor = 1e-9;
constexpr double kThresholdFloor = 1e-9;
constexpr double kScoreFloor = 1e-300;

double mean_of(const Eigen::VectorXd& v) { return v.mean(); }

double std_of(const Eigen::VectorXd& v) {
  return telemetry::batch_stats(v).std;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

[[noreturn]] void rethrow_with_context(ModelType model, const char* stage, const Error& e) {
  throw PreconditionError(std::string(to_string(model)) + " " + stage + ": " + e.what());
}

int count_clusters(const DetectorConfig& c, double parameter, const Eigen::VectorXd& data) {
  using namespace cluster;
  switch (c.model) {
    case ModelType::AffinityPropagation: {
      AffinityOptions opts;
      opts.damping = c.ap_damping;
      opts.max_iter = c.ap_max_iter;
      opts.convergence_iter = c.ap_convergence_iter;
      return affinity_propagation(data, parameter, opts).clusters.n_clusters;
    }
    case ModelType::Dbscan:
      return dbscan(data, parameter, c.min_pts).n_clusters;
    case ModelType::Hierarchical:
      return agglomerative(data, parameter, c.linkage).n_clusters;
    case ModelType::Optics: {
      OpticsOptions opts;
      opts.min_samples = c.min_samples;
      opts.min_cluster_size = c.min_cluster_size;
      opts.max_eps = c.max_eps;
      opts.cut_quantile = c.cut_quantile;
      return optics(data, opts).clusters.n_clusters;
    }
    default:
      break;
  }
  throw PreconditionError("not a cluster-count model");
}

// Training values followed by the test values that training does not contain.
Eigen::VectorXd union_values(const CountState& s, const Eigen::VectorXd& test) {
  Eigen::VectorXd out(s.reference.size() + test.size());
  out.head(s.reference.size()) = s.reference;
  Eigen::Index n = s.reference.size();
  const double* first = s.sorted_reference.data();
  const double* last = first + s.sorted_reference.size();
  for (Eigen::Index i = 0; i < test.size(); ++i)
    if (!std::binary_search(first, last, test[i])) out[n++] = test[i];
  out.conservativeResize(n);
  return out;
}

int kmeans_k(const DetectorConfig& c, const Eigen::VectorXd& data) {
  const int k_max = std::min<int>(c.k_max, static_cast<int>(data.size()) - 1);
  return cluster::best_k_silhouette(data, 2, std::max(k_max, 1), c.seed);
}

struct GapFit {
  int k = 1;
  double gap = 0.0;
};

GapFit kmeans_gap(const DetectorConfig& c, const Eigen::VectorXd& data) {
  GapFit out;
  out.k = kmeans_k(c, data);
  if (out.k < 2) return out;
  cluster::KMeansOptions opts;
  opts.seed = c.seed;
  out.gap = max_neighbour_gap(cluster::kmeans(data, out.k, opts).clusters.centroids);
  return out;
}

cluster::GmmModel gmm_model(const DetectorConfig& c, const Eigen::VectorXd& data, int k) {
  cluster::GmmOptions opts;
  opts.seed = c.seed;
  return cluster::gmm_fit(data, k, opts);
}

GapFit gmm_gap(const DetectorConfig& c, const Eigen::VectorXd& data) {
  GapFit out;
  out.k = kmeans_k(c, data);
  if (out.k < 2) return out;
  out.gap = max_neighbour_gap(gmm_model(c, data, out.k).means);
  return out;
}

double ocsvm_gamma(const DetectorConfig& c, const Eigen::VectorXd& train) {
  if (c.gamma_override) return *c.gamma_override;
  const double m = std::abs(mean_of(train));
  const double var = std::max({std_of(train) * std_of(train), 1e-12 * m * m, 1e-12});
  return 1.0 / (2.0 * var);
}

DriftVerdict gap_verdict(ModelType model, const DetectorConfig& c, double old_gap, double floor,
                         const GapFit& fresh) {
  DriftVerdict v;
  v.model = model;
  const bool degenerate = old_gap <= 0.0;
  const double threshold = degenerate ? floor : c.multiplier * old_gap;
  v.drift = fresh.gap > threshold;
  v.score = fresh.gap / std::max(threshold, kScoreFloor);
  v.detail = "k_test=" + std::to_string(fresh.k) + " new_max_gap=" + fmt(fresh.gap) +
             (degenerate ? " floor=" + fmt(floor) : " old_max_gap=" + fmt(old_gap) + " x" + fmt(c.multiplier)) +
             (v.drift ? " -> drift" : " -> no drift");
  return v;
}

}  // namespace

std::string_view to_string(ModelType model) {
  switch (model) {
    case ModelType::AffinityPropagation: return "affinity";
    case ModelType::Dbscan: return "dbscan";
    case ModelType::Gmm: return "gmm";
    case ModelType::Hierarchical: return "hierarchical";
    case ModelType::KMeans: return "kmeans";
    case ModelType::Optics: return "optics";
    case ModelType::OneClassSvm: return "ocsvm";
    case ModelType::Greedy: return "greedy";
  }
  return "dbscan";
}

ModelType model_from_string(std::string_view name) {
  for (auto m : kAllModels)
    if (to_string(m) == name) return m;
  throw Error("unknown model '" + std::string(name) +
              "' (expected affinity, dbscan, gmm, hierarchical, kmeans, optics, ocsvm or greedy)");
}

std::string_view to_string(ClusterScope scope) { return scope == ClusterScope::Union ? "union" : "test"; }

ClusterScope cluster_scope_from_string(std::string_view name) {
  if (name == "union") return ClusterScope::Union;
  if (name == "test") return ClusterScope::Test;
  throw Error("unknown cluster scope '" + std::string(name) + "' (expected union or test)");
}

void validate(const DetectorConfig& c) {
  require(c.multiplier > 0.0, "multiplier must be > 0");
  require(c.ap_multiplier > 0.0, "ap_multiplier must be > 0");
  require(c.margin >= 0.0, "margin must be >= 0");
  require(c.min_pts >= 1, "min_pts must be >= 1");
  require(c.eps_factor > 0.0, "eps_factor must be > 0");
  require(c.threshold_fraction > 0.0, "threshold_fraction must be > 0");
  require(c.min_samples >= 1, "min_samples must be >= 1");
  require(c.min_cluster_size >= 1, "min_cluster_size must be >= 1");
  require(c.max_eps > 0.0, "max_eps must be > 0");
  require(c.cut_quantile >= 0.0 && c.cut_quantile <= 1.0, "cut_quantile must be in [0, 1]");
  require(c.nu > 0.0 && c.nu <= 1.0, "nu must be in (0, 1]");
  require(!c.gamma_override || *c.gamma_override > 0.0, "gamma must be > 0");
  require(c.k_max >= 2, "k_max must be >= 2");
  require(c.gap_floor_fraction >= 0.0, "gap_floor_fraction must be >= 0");
  require(c.ap_damping >= 0.5 && c.ap_damping < 1.0, "ap_damping must be in [0.5, 1)");
  require(c.ap_max_iter >= 1 && c.ap_convergence_iter >= 1, "affinity iteration counts must be >= 1");
}

void to_json(nlohmann::json& j, const DetectorConfig& c) {
  j = {{"model", to_string(c.model)},
       {"multiplier", c.multiplier},
       {"ap_multiplier", c.ap_multiplier},
       {"margin", c.margin},
       {"min_pts", c.min_pts},
       {"eps_factor", c.eps_factor},
       {"threshold_fraction", c.threshold_fraction},
       {"linkage", cluster::to_string(c.linkage)},
       {"min_samples", c.min_samples},
       {"min_cluster_size", c.min_cluster_size},
       {"max_eps", std::isinf(c.max_eps) ? nlohmann::json(nullptr) : nlohmann::json(c.max_eps)},
       {"cut_quantile", c.cut_quantile},
       {"nu", c.nu},
       {"gamma_override", c.gamma_override ? nlohmann::json(*c.gamma_override) : nlohmann::json(nullptr)},
       {"k_max", c.k_max},
       {"gap_floor_fraction", c.gap_floor_fraction},
       {"ap_damping", c.ap_damping},
       {"ap_max_iter", c.ap_max_iter},
       {"ap_convergence_iter", c.ap_convergence_iter},
       {"cluster_scope", to_string(c.cluster_scope)},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, DetectorConfig& c) {
  c = DetectorConfig{};
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key) && !j.at(key).is_null()) j.at(key).get_to(field);
  };
  if (j.contains("model")) c.model = model_from_string(j.at("model").get<std::string>());
  get("multiplier", c.multiplier);
  get("ap_multiplier", c.ap_multiplier);
  get("margin", c.margin);
  get("min_pts", c.min_pts);
  get("eps_factor", c.eps_factor);
  get("threshold_fraction", c.threshold_fraction);
  if (j.contains("linkage")) c.linkage = cluster::linkage_from_string(j.at("linkage").get<std::string>());
  get("min_samples", c.min_samples);
  get("min_cluster_size", c.min_cluster_size);
  get("max_eps", c.max_eps);
  get("cut_quantile", c.cut_quantile);
  get("nu", c.nu);
  if (j.contains("gamma_override") && !j.at("gamma_override").is_null())
    c.gamma_override = j.at("gamma_override").get<double>();
  get("k_max", c.k_max);
  get("gap_floor_fraction", c.gap_floor_fraction);
  get("ap_damping", c.ap_damping);
  get("ap_max_iter", c.ap_max_iter);
  get("ap_convergence_iter", c.ap_convergence_iter);
  if (j.contains("cluster_scope"))
    c.cluster_scope = cluster_scope_from_string(j.at("cluster_scope").get<std::string>());
  get("seed", c.seed);
  validate(c);
}

double max_neighbour_gap(Eigen::VectorXd centroids) {
  if (centroids.size() < 2) return 0.0;
  std::sort(centroids.begin(), centroids.end());
  return (centroids.tail(centroids.size() - 1) - centroids.head(centroids.size() - 1)).maxCoeff();
}

DetectorState fit(const DetectorConfig& config, const Batch& x_train) {
  validate(config);
  const Eigen::VectorXd& x = x_train.values;
  const Eigen::Index min_n = config.model == ModelType::Greedy ? 1 : 2;
  if (x.size() < min_n)
    throw PreconditionError(std::string(to_string(config.model)) + " fit needs at least " +
                            std::to_string(min_n) + " training values");

  DetectorState state;
  state.model = config.model;
  try {
    switch (config.model) {
      case ModelType::AffinityPropagation:
      case ModelType::Dbscan:
      case ModelType::Hierarchical:
      case ModelType::Optics: {
        CountState s;
        if (config.model == ModelType::AffinityPropagation) s.parameter = cluster::min_pairwise_similarity(x);
        if (config.model == ModelType::Dbscan) s.parameter = std::max(config.eps_factor * std_of(x), kEpsFloor);
        if (config.model == ModelType::Hierarchical)
          s.parameter = std::max(config.threshold_fraction * mean_of(x), kThresholdFloor);
        s.k_train = count_clusters(config, s.parameter, x);
        if (config.cluster_scope == ClusterScope::Union) {
          s.reference = x;
          s.sorted_reference = x;
          std::sort(s.sorted_reference.begin(), s.sorted_reference.end());
        }
        state.artifacts = std::move(s);
        break;
      }
      case ModelType::KMeans: {
        const GapFit g = kmeans_gap(config, x);
        state.artifacts = GapState{g.k, g.gap, config.gap_floor_fraction * std::abs(mean_of(x))};
        break;
      }
      case ModelType::Gmm: {
        GmmState s;
        const int k = kmeans_k(config, x);
        s.model = gmm_model(config, x, k);
        s.old_max_gap = max_neighbour_gap(s.model.means);
        s.gap_floor = config.gap_floor_fraction * std::abs(mean_of(x));
        state.artifacts = std::move(s);
        break;
      }
      case ModelType::OneClassSvm:
        state.artifacts = OcsvmState{cluster::ocsvm_train(x, config.nu, ocsvm_gamma(config, x))};
        break;
      case ModelType::Greedy:
        state.artifacts = GreedyState{cluster::greedy_max(x)};
        break;
    }
  } catch (const PreconditionError& e) {
    rethrow_with_context(config.model, "fit", e);
  }
  return state;
}

DriftVerdict evaluate(const DetectorState& state, const DetectorConfig& config, const Batch& x_test) {
  if (state.model != config.model)
    throw PreconditionError("detector state was fitted for " + std::string(to_string(state.model)) +
                            ", config asks for " + std::string(to_string(config.model)));
  require(x_test.values.size() > 0, "evaluate needs a non-empty test batch");
  const Eigen::VectorXd& x = x_test.values;

  DriftVerdict v;
  v.model = config.model;
  try {
    switch (config.model) {
      case ModelType::AffinityPropagation:
      case ModelType::Dbscan:
      case ModelType::Hierarchical:
      case ModelType::Optics: {
        const auto& s = std::get<CountState>(state.artifacts);
        const bool use_union = config.cluster_scope == ClusterScope::Union && s.reference.size() > 0;
        const int k_test = count_clusters(config, s.parameter, use_union ? union_values(s, x) : x);
        const int allowed = config.model == ModelType::AffinityPropagation
                                ? static_cast<int>(std::ceil(config.ap_multiplier * s.k_train))
                                : s.k_train;
        v.score = k_test - allowed;
        v.drift = v.score > 0;
        v.detail = "k_train=" + std::to_string(s.k_train) + " k_test=" + std::to_string(k_test) +
                   (allowed != s.k_train ? " allowed=" + std::to_string(allowed) : "") +
                   (v.drift ? " -> drift" : " -> no drift");
        break;
      }
      case ModelType::KMeans: {
        const auto& s = std::get<GapState>(state.artifacts);
        v = gap_verdict(config.model, config, s.old_max_gap, s.gap_floor, kmeans_gap(config, x));
        break;
      }
      case ModelType::Gmm: {
        const auto& s = std::get<GmmState>(state.artifacts);
        v = gap_verdict(config.model, config, s.old_max_gap, s.gap_floor, gmm_gap(config, x));
        break;
      }
      case ModelType::OneClassSvm: {
        const auto& s = std::get<OcsvmState>(state.artifacts);
        const auto pred = cluster::ocsvm_predict(s.model, x);
        const auto outliers = (!pred.inlier).count();
        v.score = pred.outlier_fraction();
        v.drift = outliers > 0;
        v.detail = "outliers=" + std::to_string(outliers) + "/" + std::to_string(x.size()) +
                   (v.drift ? " -> drift" : " -> no drift");
        break;
      }
      case ModelType::Greedy: {
        const auto& s = std::get<GreedyState>(state.artifacts);
        const double test_max = cluster::greedy_max(x);
        const double limit = s.monitoring_max * (1.0 + config.margin);
        v.drift = test_max > limit;
        v.score = test_max / std::max(s.monitoring_max, kScoreFloor);
        v.detail = "test_max=" + fmt(test_max) + " limit=" + fmt(limit) + (v.drift ? " -> drift" : " -> no drift");
        break;
      }
    }
  } catch (const std::bad_variant_access&) {
    throw PreconditionError("detector state does not hold " + std::string(to_string(config.model)) + " artifacts");
  } catch (const PreconditionError& e) {
    rethrow_with_context(config.model, "evaluate", e);
  }
  return v;
}

DriftVerdict detect(const DetectorConfig& config, const Batch& x_train, const Batch& x_test) {
  return evaluate(fit(config, x_train), config, x_test);
}

nlohmann::json verdict_json(const DriftVerdict& verdict, const Batch& batch, double elapsed_ms) {
  return {{"model", to_string(verdict.model)},
          {"drift", verdict.drift},
          {"score", verdict.score},
          {"detail", verdict.detail},
          {"t_start", batch.start_t},
          {"t_end", batch.end_t},
          {"elapsed_ms", elapsed_ms}};
}

}  // namespace driftwatch::detect
