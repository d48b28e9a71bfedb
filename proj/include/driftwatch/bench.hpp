#pragma once

// Benchmark harness: replays generated scenarios through detectors and scores
// them on accuracy, detection delay, compute time, and peak memory.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftwatch/detectors.hpp"
#include "driftwatch/scenario.hpp"
#include "driftwatch/telemetry.hpp"

namespace driftwatch::bench {

struct Protocol {
  double batch_len = 9.0;
  double stride = 9.0;
  int train_window_batches = 5;
  /// Refit on the most recent `train_window_batches` batches after this many
  /// evaluations; 0 never refits.
  int refit_every = 0;
  /// Worker threads for compare_models; 0 uses the hardware concurrency.
  int threads = 0;
};

void validate(const Protocol& protocol);
void to_json(nlohmann::json& j, const Protocol& p);
void from_json(const nlohmann::json& j, Protocol& p);

struct RunRecord {
  detect::ModelType model = detect::ModelType::Dbscan;
  std::size_t config_index = 0;
  std::size_t batch_index = 0;
  double batch_start_t = 0.0;
  double batch_end_t = 0.0;
  detect::DriftVerdict verdict;
  bool truth = false;
  double compute_time = 0.0;         // seconds, fit (if any) plus evaluate
  std::int64_t allocated_bytes = 0;  // peak heap growth during the same span
  bool memory_estimated = false;
};

/// One generated scenario and every record produced on it.
struct ScenarioRun {
  scenario::ScenarioSpec spec;
  telemetry::Series series;
  scenario::GroundTruth truth;
  std::vector<RunRecord> records;  // grouped by config, in batch order
};

/// Index of the first batch starting inside the first Fulfillment phase. Throws
/// Error when that phase cannot hold `train_window_batches` whole batches.
std::size_t training_start(const std::vector<telemetry::Batch>& batches, const scenario::GroundTruth& truth,
                           const Protocol& protocol);

/// Fits `config` on batches [train_first, train_first + train_window_batches)
/// and evaluates every later batch, one record each. Truth labels come from
/// `truth` when given and are false otherwise.
std::vector<RunRecord> replay(const std::vector<telemetry::Batch>& batches, std::size_t train_first,
                              const detect::DetectorConfig& config, const Protocol& protocol,
                              const scenario::GroundTruth* truth = nullptr, std::size_t config_index = 0);

/// Generates the series, fits each config once on the first
/// `train_window_batches` batches lying wholly inside the first Fulfillment
/// phase, and evaluates every later batch.
ScenarioRun run_scenario(const scenario::ScenarioSpec& spec, const std::vector<detect::DetectorConfig>& configs,
                         const Protocol& protocol = {});

std::vector<RunRecord> records_for(const ScenarioRun& run, std::size_t config_index);

/// Fraction of records whose verdict matches the truth label. Empty → error.
double accuracy(const std::vector<RunRecord>& records);

/// Fraction of positive verdicts among truth = false records; 0 when there are none.
double false_positive_rate(const std::vector<RunRecord>& records);

/// Mean over drift onsets of (end of the first positive record ending after the
/// onset) - onset. +inf when any onset goes undetected.
double detection_delay(const std::vector<RunRecord>& records, const scenario::GroundTruth& truth);

struct TimeStats {
  double mean = 0.0;
  double max = 0.0;
};

TimeStats compute_time_stats(const std::vector<RunRecord>& records);

struct MemoryUsage {
  std::int64_t peak_bytes = 0;
  bool estimated = false;
};

/// Largest per-record allocation peak; estimated if any record was.
MemoryUsage memory_usage(const std::vector<RunRecord>& records);

/// Peak heap growth of fit + evaluate on the given batches. Measured through
/// the allocation hook when linked, otherwise `estimate_bytes`.
MemoryUsage measure_memory(const detect::DetectorConfig& config, const telemetry::Batch& x_train,
                           const telemetry::Batch& x_test);

/// Analytic working-set size of fit + evaluate, counting the dominant buffers
/// of each engine: four n×n matrices for affinity propagation, one n×n matrix
/// for hierarchical merging and the one-class SVM kernel, O(n) for the rest.
std::int64_t estimate_bytes(const detect::DetectorConfig& config, Eigen::Index n_train, Eigen::Index n_test);

/// Metrics of one (config, scenario, seed) run.
struct RunMetrics {
  std::string model;
  std::string scenario;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double false_positive_rate = 0.0;
  double detection_delay = 0.0;
  double mean_compute_time = 0.0;
  double max_compute_time = 0.0;
  std::int64_t peak_memory_bytes = 0;
  bool memory_estimated = false;
  std::size_t correct_batches = 0;
  std::size_t total_batches = 0;
};

/// Aggregate over runs: every rate and time is the mean of the per-run values,
/// the delay is +inf if any run missed an onset, memory is the maximum.
struct ModelSummary {
  std::string model;
  std::string scenario;  // empty for the all-scenario row
  std::size_t runs = 0;
  double accuracy = 0.0;
  double false_positive_rate = 0.0;
  double avg_detection_delay = 0.0;
  double max_detection_delay = 0.0;
  double avg_compute_time = 0.0;
  double max_compute_time = 0.0;
  std::int64_t peak_memory_bytes = 0;
  bool memory_estimated = false;
  std::size_t correct_batches = 0;
  std::size_t total_batches = 0;

  friend bool operator==(const ModelSummary&, const ModelSummary&) = default;
};

ModelSummary summarize(const std::vector<RunMetrics>& runs);

struct Calibration {
  bool ok = true;
  std::string detail;
};

struct BenchReport {
  std::vector<ModelSummary> models;       // one row per config
  std::vector<ModelSummary> by_scenario;  // one row per (config, scenario)
  std::vector<RunMetrics> runs;
  std::map<std::string, std::vector<std::string>> rankings;  // metric → models, best first
  Calibration calibration;
  nlohmann::json config_echo;
  std::vector<ScenarioRun> timelines;  // first repetition of each scenario; not serialized
};

/// Runs every scenario `repetitions` times with seeds seed_base + r, each run
/// shared by all configs.
BenchReport compare_models(const std::vector<scenario::ScenarioSpec>& scenarios,
                           const std::vector<detect::DetectorConfig>& configs, int repetitions,
                           std::uint64_t seed_base, const Protocol& protocol = {});

/// Writes report.json, report.csv (`model,metric,value`) and one
/// timeline_<model>.csv (`scenario,seed,t,value,truth,verdict`) per config into
/// `dir`, creating it if needed. Throws Error when the sink is not writable.
void emit_report(const BenchReport& report, const std::filesystem::path& dir);

/// Human-readable ranking table.
std::string render_rankings(const BenchReport& report);

void to_json(nlohmann::json& j, const RunMetrics& m);
void from_json(const nlohmann::json& j, RunMetrics& m);
void to_json(nlohmann::json& j, const ModelSummary& s);
void from_json(const nlohmann::json& j, ModelSummary& s);
/// Infinite delays serialize as null. `timelines` is not part of the document.
void to_json(nlohmann::json& j, const BenchReport& r);
void from_json(const nlohmann::json& j, BenchReport& r);

}  // namespace driftwatch::bench
