// driftwatch: generate synthetic intent telemetry, run one detection, replay a
// capture batch by batch, or benchmark every model on the presets.
//
// Exit codes: 0 success / no drift, 1 drift (detect only), 2 error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "driftwatch/bench.hpp"
#include "driftwatch/detectors.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/scenario.hpp"
#include "driftwatch/telemetry.hpp"

namespace dw = driftwatch;
using nlohmann::json;

namespace {

constexpr int kExitDrift = 1;
constexpr int kExitError = 2;

// Flags mirroring DetectorConfig. Unset flags leave the base config alone.
struct ConfigFlags {
  std::string config_file;
  std::optional<double> multiplier, ap_multiplier, margin, eps_factor, threshold_fraction, max_eps, cut_quantile, nu,
      gamma, gap_floor_fraction, ap_damping;
  std::optional<int> min_pts, min_samples, min_cluster_size, k_max, ap_max_iter, ap_convergence_iter;
  std::optional<std::string> linkage, cluster_scope;
  std::optional<std::uint64_t> detector_seed;

  void attach(CLI::App& app) {
    app.add_option("--config", config_file, "DetectorConfig JSON file; flags override its fields");
    app.add_option("--multiplier", multiplier, "K-Means/GMM gap multiplier (default 2.0)");
    app.add_option("--ap-multiplier", ap_multiplier, "affinity cluster-count multiplier (default 1.0)");
    app.add_option("--margin", margin, "greedy margin (default 0.25)");
    app.add_option("--min-pts", min_pts, "DBSCAN MinPts (default 4)");
    app.add_option("--eps-factor", eps_factor, "DBSCAN eps = factor * std(train) (default 1.5)");
    app.add_option("--threshold-fraction", threshold_fraction,
                   "hierarchical threshold = fraction * mean(train) (default 0.1)");
    app.add_option("--linkage", linkage, "hierarchical linkage: single, complete, average (default average)");
    app.add_option("--min-samples", min_samples, "OPTICS min_samples (default 4)");
    app.add_option("--min-cluster-size", min_cluster_size, "OPTICS min_cluster_size (default 4)");
    app.add_option("--max-eps", max_eps, "OPTICS max_eps (default inf)");
    app.add_option("--cut-quantile", cut_quantile, "OPTICS reachability cut quantile (default 0.75)");
    app.add_option("--nu", nu, "one-class SVM nu (default 0.1)");
    app.add_option("--gamma", gamma, "one-class SVM gamma (default 1 / (2 var(train)))");
    app.add_option("--k-max", k_max, "silhouette search bound (default 8)");
    app.add_option("--gap-floor-fraction", gap_floor_fraction, "gap floor as a fraction of mean(train) (default 1e-6)");
    app.add_option("--ap-damping", ap_damping, "affinity damping (default 0.9)");
    app.add_option("--ap-max-iter", ap_max_iter, "affinity iteration cap (default 500)");
    app.add_option("--ap-convergence-iter", ap_convergence_iter, "affinity stable iterations (default 15)");
    app.add_option("--cluster-scope", cluster_scope, "cluster-count scope: union or test (default union)");
    app.add_option("--detector-seed", detector_seed, "seed for k-means/GMM initialisation (default 0)");
  }

  dw::detect::DetectorConfig build(dw::detect::ModelType model) const {
    dw::detect::DetectorConfig c;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw dw::Error("cannot read config file " + config_file);
      c = json::parse(in).get<dw::detect::DetectorConfig>();
    }
    c.model = model;
    if (multiplier) c.multiplier = *multiplier;
    if (ap_multiplier) c.ap_multiplier = *ap_multiplier;
    if (margin) c.margin = *margin;
    if (min_pts) c.min_pts = *min_pts;
    if (eps_factor) c.eps_factor = *eps_factor;
    if (threshold_fraction) c.threshold_fraction = *threshold_fraction;
    if (linkage) c.linkage = dw::cluster::linkage_from_string(*linkage);
    if (min_samples) c.min_samples = *min_samples;
    if (min_cluster_size) c.min_cluster_size = *min_cluster_size;
    if (max_eps) c.max_eps = *max_eps;
    if (cut_quantile) c.cut_quantile = *cut_quantile;
    if (nu) c.nu = *nu;
    if (gamma) c.gamma_override = *gamma;
    if (k_max) c.k_max = *k_max;
    if (gap_floor_fraction) c.gap_floor_fraction = *gap_floor_fraction;
    if (ap_damping) c.ap_damping = *ap_damping;
    if (ap_max_iter) c.ap_max_iter = *ap_max_iter;
    if (ap_convergence_iter) c.ap_convergence_iter = *ap_convergence_iter;
    if (cluster_scope) c.cluster_scope = dw::detect::cluster_scope_from_string(*cluster_scope);
    if (detector_seed) c.seed = *detector_seed;
    dw::detect::validate(c);
    return c;
  }
};

std::uint64_t default_seed() {
  const char* env = std::getenv("DRIFTWATCH_SEED");
  if (!env || !*env) return 1;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used);
    if (used == std::string(env).size()) return v;
  } catch (const std::exception&) {
  }
  throw dw::Error(std::string("DRIFTWATCH_SEED is not an unsigned integer: '") + env + "'");
}

std::vector<std::string> split_list(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dw::Error("cannot write " + path);
  out << content;
  out.close();
  if (!out) throw dw::Error("failed writing " + path);
}

// ------------------------------------------------------------- commands --

struct GenerateArgs {
  std::string preset, spec_file, out;
  std::optional<std::uint64_t> seed;
};

int cmd_generate(const GenerateArgs& a) {
  dw::scenario::ScenarioSpec spec;
  if (!a.spec_file.empty()) {
    std::ifstream in(a.spec_file);
    if (!in) throw dw::Error("cannot read spec file " + a.spec_file);
    spec = json::parse(in).get<dw::scenario::ScenarioSpec>();
  } else {
    spec = dw::scenario::preset(a.preset);
  }
  spec.seed = a.seed ? *a.seed : default_seed();
  const auto [series, truth] = dw::scenario::generate(spec);
  write_file(a.out + ".csv", dw::telemetry::render_csv(series));
  write_file(a.out + ".truth.json", json(truth).dump(2) + "\n");
  std::cout << json{{"csv", a.out + ".csv"},
                    {"truth", a.out + ".truth.json"},
                    {"samples", series.size()},
                    {"intent_tag", spec.intent_tag},
                    {"seed", spec.seed}}
                   .dump()
            << '\n';
  return 0;
}

struct DetectArgs {
  std::string model, train, test;
};

int cmd_detect(const DetectArgs& a, const ConfigFlags& flags) {
  const auto config = flags.build(dw::detect::model_from_string(a.model));
  const auto train = dw::telemetry::as_batch(dw::telemetry::read_csv_file(a.train));
  const auto test = dw::telemetry::as_batch(dw::telemetry::read_csv_file(a.test));
  const auto start = std::chrono::steady_clock::now();
  const auto verdict = dw::detect::detect(config, train, test);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  std::cout << dw::detect::verdict_json(verdict, test, ms).dump() << '\n';
  return verdict.drift ? kExitDrift : 0;
}

struct ReplayArgs {
  std::string model, csv, truth;
  double batch_len = 9.0;
  int train_batches = 5;
};

int cmd_replay(const ReplayArgs& a, const ConfigFlags& flags) {
  const auto config = flags.build(dw::detect::model_from_string(a.model));
  const auto series = dw::telemetry::read_csv_file(a.csv);
  dw::bench::Protocol protocol;
  protocol.batch_len = a.batch_len;
  protocol.stride = a.batch_len;
  protocol.train_window_batches = a.train_batches;
  dw::bench::validate(protocol);

  const auto batches = dw::telemetry::batchify(series, protocol.batch_len, protocol.stride);
  if (batches.empty()) throw dw::Error("batch length exceeds the capture span");

  std::optional<dw::scenario::GroundTruth> truth;
  if (!a.truth.empty()) {
    std::ifstream in(a.truth);
    if (!in) throw dw::Error("cannot read truth file " + a.truth);
    truth = json::parse(in).get<dw::scenario::GroundTruth>();
  }
  // With ground truth the reference window starts in the Fulfillment phase, as
  // in the benchmark; a bare capture trains on its first batches.
  const std::size_t first = truth ? dw::bench::training_start(batches, *truth, protocol) : 0;
  const auto records = dw::bench::replay(batches, first, config, protocol, truth ? &*truth : nullptr);

  for (const auto& r : records) {
    dw::telemetry::Batch b;
    b.start_t = r.batch_start_t;
    b.end_t = r.batch_end_t;
    auto line = dw::detect::verdict_json(r.verdict, b, r.compute_time * 1e3);
    if (truth) line["truth"] = r.truth;
    std::cout << line.dump() << '\n';
  }
  if (truth) {
    json summary = {{"summary", true},
                    {"model", a.model},
                    {"batches", records.size()},
                    {"accuracy", dw::bench::accuracy(records)},
                    {"false_positive_rate", dw::bench::false_positive_rate(records)}};
    if (truth->drift_onsets().empty()) {
      summary["detection_delay"] = nullptr;
    } else {
      const double d = dw::bench::detection_delay(records, *truth);
      summary["detection_delay"] = std::isinf(d) ? json(nullptr) : json(d);
    }
    std::cout << summary.dump() << '\n';
  }
  return 0;
}

struct BenchArgs {
  std::string models = "all", presets = "all", out;
  int reps = 15;
  int threads = 0;
  int train_batches = 5;
  int refit_every = 0;
  double batch_len = 9.0;
  std::optional<std::uint64_t> seed;
  bool pretty = false;
};

int cmd_bench(const BenchArgs& a, const ConfigFlags& flags) {
  std::vector<dw::detect::DetectorConfig> configs;
  if (a.models == "all") {
    for (auto m : dw::detect::kAllModels) configs.push_back(flags.build(m));
  } else {
    for (const auto& name : split_list(a.models)) configs.push_back(flags.build(dw::detect::model_from_string(name)));
  }
  std::vector<dw::scenario::ScenarioSpec> scenarios;
  const auto preset_names = a.presets == "all" ? std::vector<std::string>{"security", "qos"} : split_list(a.presets);
  for (const auto& name : preset_names) scenarios.push_back(dw::scenario::preset(name));
  if (configs.empty() || scenarios.empty()) throw dw::Error("need at least one model and one preset");

  dw::bench::Protocol protocol;
  protocol.batch_len = a.batch_len;
  protocol.stride = a.batch_len;
  protocol.train_window_batches = a.train_batches;
  protocol.refit_every = a.refit_every;
  protocol.threads = a.threads;

  const std::uint64_t seed = a.seed ? *a.seed : default_seed();
  const auto start = std::chrono::steady_clock::now();
  const auto report = dw::bench::compare_models(scenarios, configs, a.reps, seed, protocol);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  dw::bench::emit_report(report, a.out);

  const std::string table = dw::bench::render_rankings(report);
  (a.pretty ? std::cout : std::cerr) << table;
  std::cout << json{{"out", a.out},
                    {"runs", report.runs.size()},
                    {"seconds", secs},
                    {"calibration_ok", report.calibration.ok}}
                   .dump()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intent drift detection over network throughput telemetry"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "generate a synthetic scenario capture and its ground truth");
  auto* preset_opt = generate->add_option("--preset", gen.preset, "security or qos");
  auto* spec_opt = generate->add_option("--spec", gen.spec_file, "ScenarioSpec JSON file");
  preset_opt->excludes(spec_opt);
  generate->add_option("--seed", gen.seed, "generator seed (default $DRIFTWATCH_SEED or 1)");
  generate->add_option("--out", gen.out, "output prefix; writes <out>.csv and <out>.truth.json")->required();

  DetectArgs det;
  ConfigFlags det_flags;
  auto* detect = app.add_subcommand("detect", "fit on one capture, judge another; exit 1 on drift");
  detect->add_option("--model", det.model, "affinity, dbscan, gmm, hierarchical, kmeans, optics, ocsvm, greedy")
      ->required();
  detect->add_option("--train", det.train, "training capture CSV")->required();
  detect->add_option("--test", det.test, "test capture CSV")->required();
  det_flags.attach(*detect);

  ReplayArgs rep;
  ConfigFlags rep_flags;
  auto* replay = app.add_subcommand("replay", "stream one verdict per batch of a capture");
  replay->add_option("--model", rep.model, "detector model")->required();
  replay->add_option("--csv", rep.csv, "capture CSV")->required();
  replay->add_option("--truth", rep.truth, "ground-truth JSON; adds a summary line");
  replay->add_option("--batch-len", rep.batch_len, "batch length in seconds (default 9)");
  replay->add_option("--train-batches", rep.train_batches, "batches in the training window (default 5)");
  rep_flags.attach(*replay);

  BenchArgs ben;
  ConfigFlags ben_flags;
  auto* bench = app.add_subcommand("bench", "benchmark models on the presets and write report files");
  bench->add_option("--models", ben.models, "comma-separated models or 'all' (default all)");
  bench->add_option("--presets", ben.presets, "comma-separated presets or 'all' (default all)");
  bench->add_option("--reps", ben.reps, "seeds per preset (default 15)");
  bench->add_option("--seed", ben.seed, "first seed (default $DRIFTWATCH_SEED or 1)");
  bench->add_option("--out", ben.out, "report directory")->required();
  bench->add_option("--threads", ben.threads, "worker threads (default: all cores)");
  bench->add_option("--batch-len", ben.batch_len, "batch length in seconds (default 9)");
  bench->add_option("--train-batches", ben.train_batches, "batches in the training window (default 5)");
  bench->add_option("--refit-every", ben.refit_every, "refit after this many evaluations; 0 never (default 0)");
  bench->add_flag("--pretty", ben.pretty, "print the ranking table on stdout instead of stderr");
  ben_flags.attach(*bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*generate) {
      if (gen.preset.empty() && gen.spec_file.empty()) throw dw::Error("generate needs --preset or --spec");
      return cmd_generate(gen);
    }
    if (*detect) return cmd_detect(det, det_flags);
    if (*replay) return cmd_replay(rep, rep_flags);
    if (*bench) return cmd_bench(ben, ben_flags);
  } catch (const dw::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const dw::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
