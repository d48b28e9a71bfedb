#include "driftwatch/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "driftwatch/alloc_stats.hpp"
#include "driftwatch/error.hpp"

namespace driftwatch::bench {
namespace {

using detect::DetectorConfig;
using detect::ModelType;
using telemetry::Batch;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTimeSlack = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs `fn`, returning its wall time and peak heap growth (or the estimate).
template <class Fn>
auto timed(const DetectorConfig& config, Eigen::Index n_train, Eigen::Index n_test, Fn&& fn) {
  struct Out {
    double seconds;
    std::int64_t bytes;
    bool estimated;
  };
  const bool hooked = alloc::hook_available();
  const auto start = Clock::now();
  std::int64_t bytes = 0;
  if (hooked) {
    bytes = alloc::measure_peak([&] {
              fn();
              return 0;
            }).second;
  } else {
    fn();
  }
  const double secs = seconds_since(start);
  if (!hooked) bytes = estimate_bytes(config, n_train, n_test);
  return Out{secs, bytes, !hooked};
}

Batch window(const std::vector<Batch>& batches, std::size_t first, std::size_t count) {
  std::vector<Batch> part(batches.begin() + static_cast<std::ptrdiff_t>(first),
                          batches.begin() + static_cast<std::ptrdiff_t>(first + count));
  Batch b;
  b.start_t = part.front().start_t;
  b.end_t = part.back().end_t;
  b.values = telemetry::concat_values(part);
  return b;
}

std::string model_label(const std::vector<DetectorConfig>& configs, std::size_t index) {
  const auto name = std::string(detect::to_string(configs[index].model));
  const auto same = std::count_if(configs.begin(), configs.end(),
                                  [&](const DetectorConfig& c) { return c.model == configs[index].model; });
  return same > 1 ? name + "#" + std::to_string(index) : name;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

void validate(const Protocol& p) {
  require(p.batch_len > 0.0, "batch_len must be > 0");
  require(p.stride > 0.0, "stride must be > 0");
  require(p.train_window_batches >= 1, "train_window_batches must be >= 1");
  require(p.refit_every >= 0, "refit_every must be >= 0");
  require(p.threads >= 0, "threads must be >= 0");
}

void to_json(nlohmann::json& j, const Protocol& p) {
  j = {{"batch_len", p.batch_len},
       {"stride", p.stride},
       {"train_window_batches", p.train_window_batches},
       {"refit_every", p.refit_every}};
}

void from_json(const nlohmann::json& j, Protocol& p) {
  p = Protocol{};
  if (j.contains("batch_len")) j.at("batch_len").get_to(p.batch_len);
  if (j.contains("stride")) j.at("stride").get_to(p.stride);
  if (j.contains("train_window_batches")) j.at("train_window_batches").get_to(p.train_window_batches);
  if (j.contains("refit_every")) j.at("refit_every").get_to(p.refit_every);
  validate(p);
}

std::size_t training_start(const std::vector<Batch>& batches, const scenario::GroundTruth& truth,
                           const Protocol& protocol) {
  validate(protocol);
  std::size_t phase = 0;
  while (phase < truth.boundaries.size() && truth.boundaries[phase].kind != scenario::PhaseKind::Fulfillment)
    ++phase;
  if (phase == truth.boundaries.size()) throw Error("scenario has no Fulfillment phase to train on");
  const auto [f_start, f_end] = truth.phase_span(phase);

  std::size_t first = 0;
  while (first < batches.size() && batches[first].start_t < f_start - kTimeSlack) ++first;
  const auto window_len = static_cast<std::size_t>(protocol.train_window_batches);
  if (first + window_len > batches.size() || batches[first + window_len - 1].end_t > f_end + kTimeSlack)
    throw Error("Fulfillment phase is shorter than the " + std::to_string(protocol.train_window_batches) +
                "-batch training window");
  return first;
}

std::vector<RunRecord> replay(const std::vector<Batch>& batches, std::size_t train_first,
                              const DetectorConfig& config, const Protocol& protocol,
                              const scenario::GroundTruth* truth, std::size_t config_index) {
  validate(protocol);
  const auto window_len = static_cast<std::size_t>(protocol.train_window_batches);
  if (train_first + window_len >= batches.size())
    throw Error("need more than " + std::to_string(window_len) + " batches after the training start, have " +
                std::to_string(batches.size() > train_first ? batches.size() - train_first : 0));

  std::vector<RunRecord> records;
  Batch train = window(batches, train_first, window_len);
  detect::DetectorState state;
  bool pending_fit = true;
  std::size_t since_fit = 0;
  for (std::size_t b = train_first + window_len; b < batches.size(); ++b) {
    if (protocol.refit_every > 0 && since_fit == static_cast<std::size_t>(protocol.refit_every)) {
      train = window(batches, b - window_len, window_len);
      pending_fit = true;
    }
    RunRecord rec;
    rec.model = config.model;
    rec.config_index = config_index;
    rec.batch_index = b;
    rec.batch_start_t = batches[b].start_t;
    rec.batch_end_t = batches[b].end_t;
    rec.truth = truth ? scenario::label_batch(batches[b], *truth) : false;
    const auto cost = timed(config, train.values.size(), batches[b].values.size(), [&] {
      if (pending_fit) state = detect::fit(config, train);
      rec.verdict = detect::evaluate(state, config, batches[b]);
    });
    if (pending_fit) {
      pending_fit = false;
      since_fit = 0;
    }
    ++since_fit;
    rec.compute_time = cost.seconds;
    rec.allocated_bytes = cost.bytes;
    rec.memory_estimated = cost.estimated;
    records.push_back(std::move(rec));
  }
  return records;
}

ScenarioRun run_scenario(const scenario::ScenarioSpec& spec, const std::vector<DetectorConfig>& configs,
                         const Protocol& protocol) {
  validate(protocol);
  ScenarioRun run;
  run.spec = spec;
  std::tie(run.series, run.truth) = scenario::generate(spec);
  const auto batches = telemetry::batchify(run.series, protocol.batch_len, protocol.stride);
  std::size_t first = 0;
  try {
    first = training_start(batches, run.truth, protocol);
  } catch (const Error& e) {
    throw Error("'" + spec.intent_tag + "': " + e.what());
  }
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    auto recs = replay(batches, first, configs[ci], protocol, &run.truth, ci);
    run.records.insert(run.records.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
  }
  return run;
}

std::vector<RunRecord> records_for(const ScenarioRun& run, std::size_t config_index) {
  std::vector<RunRecord> out;
  for (const auto& r : run.records)
    if (r.config_index == config_index) out.push_back(r);
  return out;
}

double accuracy(const std::vector<RunRecord>& records) {
  require(!records.empty(), "accuracy needs at least one record");
  const auto correct =
      std::count_if(records.begin(), records.end(), [](const RunRecord& r) { return r.verdict.drift == r.truth; });
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double false_positive_rate(const std::vector<RunRecord>& records) {
  std::size_t negatives = 0, flagged = 0;
  for (const auto& r : records) {
    if (r.truth) continue;
    ++negatives;
    if (r.verdict.drift) ++flagged;
  }
  return negatives ? static_cast<double>(flagged) / static_cast<double>(negatives) : 0.0;
}

double detection_delay(const std::vector<RunRecord>& records, const scenario::GroundTruth& truth) {
  const auto onsets = truth.drift_onsets();
  require(!onsets.empty(), "detection_delay needs a scenario with a Drift phase");
  double total = 0.0;
  for (double onset : onsets) {
    double hit = kInf;
    for (const auto& r : records)
      if (r.verdict.drift && r.batch_end_t > onset + kTimeSlack) hit = std::min(hit, r.batch_end_t);
    if (std::isinf(hit)) return kInf;
    total += hit - onset;
  }
  return total / static_cast<double>(onsets.size());
}

TimeStats compute_time_stats(const std::vector<RunRecord>& records) {
  require(!records.empty(), "compute_time_stats needs at least one record");
  TimeStats s;
  for (const auto& r : records) {
    s.mean += r.compute_time;
    s.max = std::max(s.max, r.compute_time);
  }
  s.mean /= static_cast<double>(records.size());
  return s;
}

MemoryUsage memory_usage(const std::vector<RunRecord>& records) {
  MemoryUsage m;
  for (const auto& r : records) {
    m.peak_bytes = std::max(m.peak_bytes, r.allocated_bytes);
    m.estimated = m.estimated || r.memory_estimated;
  }
  return m;
}

MemoryUsage measure_memory(const DetectorConfig& config, const Batch& x_train, const Batch& x_test) {
  const auto cost = timed(config, x_train.values.size(), x_test.values.size(),
                          [&] { detect::evaluate(detect::fit(config, x_train), config, x_test); });
  return {cost.bytes, cost.estimated};
}

std::int64_t estimate_bytes(const DetectorConfig& config, Eigen::Index n_train, Eigen::Index n_test) {
  constexpr std::int64_t d = sizeof(double);
  const std::int64_t nt = n_train;
  const std::int64_t m =
      config.cluster_scope == detect::ClusterScope::Union ? n_train + n_test : std::max(n_train, n_test);
  const std::int64_t k = config.k_max;
  switch (config.model) {
    case ModelType::AffinityPropagation:
      return 4 * m * m * d + m * config.ap_convergence_iter + 4 * m * d;
    case ModelType::Hierarchical:
      return m * m * d + 4 * m * d;
    case ModelType::OneClassSvm:
      return nt * nt * d + 4 * nt * d;
    case ModelType::Dbscan:
      return 4 * m * d;
    case ModelType::Optics:
      return 5 * m * d;
    case ModelType::KMeans:
      return (k + 4) * std::max(nt, std::int64_t{n_test}) * d;
    case ModelType::Gmm:
      return (4 * k + 4) * std::max(nt, std::int64_t{n_test}) * d;
    case ModelType::Greedy:
      return 0;
  }
  return 0;
}

ModelSummary summarize(const std::vector<RunMetrics>& runs) {
  require(!runs.empty(), "summarize needs at least one run");
  ModelSummary s;
  s.model = runs.front().model;
  s.runs = runs.size();
  std::vector<double> acc, fpr, delay, compute;
  for (const auto& r : runs) {
    acc.push_back(r.accuracy);
    fpr.push_back(r.false_positive_rate);
    delay.push_back(r.detection_delay);
    compute.push_back(r.mean_compute_time);
    s.max_compute_time = std::max(s.max_compute_time, r.max_compute_time);
    s.max_detection_delay = std::max(s.max_detection_delay, r.detection_delay);
    s.peak_memory_bytes = std::max(s.peak_memory_bytes, r.peak_memory_bytes);
    s.memory_estimated = s.memory_estimated || r.memory_estimated;
    s.correct_batches += r.correct_batches;
    s.total_batches += r.total_batches;
  }
  s.accuracy = mean_of(acc);
  s.false_positive_rate = mean_of(fpr);
  s.avg_detection_delay = mean_of(delay);  // +inf propagates
  s.avg_compute_time = mean_of(compute);
  return s;
}

BenchReport compare_models(const std::vector<scenario::ScenarioSpec>& scenarios,
                           const std::vector<DetectorConfig>& configs, int repetitions, std::uint64_t seed_base,
                           const Protocol& protocol) {
  validate(protocol);
  require(!scenarios.empty(), "compare_models needs at least one scenario");
  require(!configs.empty(), "compare_models needs at least one detector config");
  require(repetitions >= 1, "repetitions must be >= 1");
  for (const auto& c : configs) detect::validate(c);
  for (const auto& s : scenarios) {
    scenario::validate(s);
    bool has_drift = false;
    for (const auto& p : s.phases) has_drift = has_drift || p.kind == scenario::PhaseKind::Drift;
    if (!has_drift) throw PreconditionError("scenario '" + s.intent_tag + "' has no Drift phase to detect");
  }

  // One job per (scenario, repetition); all configs share the generated series.
  const std::size_t jobs = scenarios.size() * static_cast<std::size_t>(repetitions);
  std::vector<ScenarioRun> results(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs;) {
      try {
        auto spec = scenarios[j / static_cast<std::size_t>(repetitions)];
        spec.seed = seed_base + j % static_cast<std::size_t>(repetitions);
        results[j] = run_scenario(spec, configs, protocol);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_threads =
      std::min(jobs, protocol.threads > 0 ? static_cast<std::size_t>(protocol.threads) : hw);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  BenchReport report;
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    const std::string label = model_label(configs, ci);
    std::vector<RunMetrics> all;
    for (std::size_t si = 0; si < scenarios.size(); ++si) {
      std::vector<RunMetrics> per_scenario;
      for (int r = 0; r < repetitions; ++r) {
        const ScenarioRun& run = results[si * static_cast<std::size_t>(repetitions) + static_cast<std::size_t>(r)];
        const auto recs = records_for(run, ci);
        RunMetrics m;
        m.model = label;
        m.scenario = run.spec.intent_tag;
        m.seed = run.spec.seed;
        m.accuracy = accuracy(recs);
        m.false_positive_rate = false_positive_rate(recs);
        m.detection_delay = detection_delay(recs, run.truth);
        const auto t = compute_time_stats(recs);
        m.mean_compute_time = t.mean;
        m.max_compute_time = t.max;
        const auto mem = memory_usage(recs);
        m.peak_memory_bytes = mem.peak_bytes;
        m.memory_estimated = mem.estimated;
        m.total_batches = recs.size();
        m.correct_batches = static_cast<std::size_t>(std::count_if(
            recs.begin(), recs.end(), [](const RunRecord& x) { return x.verdict.drift == x.truth; }));
        per_scenario.push_back(m);
        report.runs.push_back(m);
      }
      ModelSummary row = summarize(per_scenario);
      row.scenario = scenarios[si].intent_tag;
      report.by_scenario.push_back(row);
      all.insert(all.end(), per_scenario.begin(), per_scenario.end());
    }
    report.models.push_back(summarize(all));
  }

  auto rank = [&](const char* metric, auto key, bool descending) {
    std::vector<const ModelSummary*> rows;
    for (const auto& m : report.models) rows.push_back(&m);
    std::stable_sort(rows.begin(), rows.end(), [&](const ModelSummary* a, const ModelSummary* b) {
      return descending ? key(*a) > key(*b) : key(*a) < key(*b);
    });
    auto& out = report.rankings[metric];
    for (const auto* r : rows) out.push_back(r->model);
  };
  rank("accuracy", [](const ModelSummary& m) { return m.accuracy; }, true);
  rank("false_positive_rate", [](const ModelSummary& m) { return m.false_positive_rate; }, false);
  rank("avg_detection_delay", [](const ModelSummary& m) { return m.avg_detection_delay; }, false);
  rank("avg_compute_time", [](const ModelSummary& m) { return m.avg_compute_time; }, false);
  rank("peak_memory_bytes", [](const ModelSummary& m) { return static_cast<double>(m.peak_memory_bytes); }, false);

  // DBSCAN is expected to be at least as accurate as affinity propagation and
  // the greedy baseline on the presets.
  auto find = [&](std::string_view name) -> const ModelSummary* {
    for (const auto& m : report.models)
      if (m.model == name) return &m;
    return nullptr;
  };
  const ModelSummary* db = find("dbscan");
  std::vector<const ModelSummary*> rivals;
  for (const char* name : {"affinity", "greedy"})
    if (const auto* m = find(name)) rivals.push_back(m);
  if (!db || rivals.empty()) {
    report.calibration = {true, "not applicable: needs dbscan and affinity or greedy"};
  } else {
    report.calibration.ok = true;
    for (const auto* r : rivals) {
      const bool beat = db->accuracy >= r->accuracy;
      report.calibration.ok = report.calibration.ok && beat;
      if (!report.calibration.detail.empty()) report.calibration.detail += "; ";
      report.calibration.detail +=
          "dbscan " + std::string(beat ? ">=" : "<") + " " + r->model + " in mean accuracy";
    }
    if (!report.calibration.ok) report.calibration.detail = "calibration failure: " + report.calibration.detail;
  }

  nlohmann::json echo;
  echo["configs"] = configs;
  echo["protocol"] = protocol;
  echo["repetitions"] = repetitions;
  echo["seed_base"] = seed_base;
  echo["scenarios"] = nlohmann::json::array();
  for (const auto& s : scenarios) echo["scenarios"].push_back(s);
  echo["memory_accounting"] = alloc::hook_available() ? "measured" : "estimated";
  report.config_echo = std::move(echo);

  for (std::size_t si = 0; si < scenarios.size(); ++si)
    report.timelines.push_back(std::move(results[si * static_cast<std::size_t>(repetitions)]));
  return report;
}

}  // namespace driftwatch::bench
