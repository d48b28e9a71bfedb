#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "driftwatch/alloc_stats.hpp"
#include "driftwatch/bench.hpp"
#include "driftwatch/error.hpp"

using namespace driftwatch;
using namespace driftwatch::bench;
using detect::DetectorConfig;
using detect::ModelType;
using scenario::PhaseKind;
using scenario::PhaseSpec;

namespace {

RunRecord record(double start, double end, bool drift, bool truth) {
  RunRecord r;
  r.batch_start_t = start;
  r.batch_end_t = end;
  r.verdict.drift = drift;
  r.truth = truth;
  return r;
}

scenario::GroundTruth truth_with_onsets(std::vector<double> onsets, double span) {
  scenario::GroundTruth g;
  g.boundaries.push_back({0.0, PhaseKind::Normal});
  for (double o : onsets) g.boundaries.push_back({o, PhaseKind::Drift});
  g.span = span;
  return g;
}

// Small three-phase scenario: 90 s fulfillment, 90 s drift ramp, 36 s failure.
scenario::ScenarioSpec small_spec(std::uint64_t seed = 3) {
  scenario::ScenarioSpec s;
  s.intent_tag = "small";
  s.seed = seed;
  s.phases = {PhaseSpec::steady(PhaseKind::Fulfillment, 90, 1000), PhaseSpec::drift(90, 1000, 4000, 50),
              PhaseSpec::steady(PhaseKind::Failure, 36, 4000)};
  return s;
}

DetectorConfig config(ModelType m) {
  DetectorConfig c;
  c.model = m;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("accuracy and false positive rate on a worked example") {
  // 13 batches, 2 wrong: one false alarm and one miss.
  std::vector<RunRecord> recs;
  for (int i = 0; i < 8; ++i) recs.push_back(record(9.0 * i, 9.0 * i + 9, i == 3, false));
  for (int i = 8; i < 13; ++i) recs.push_back(record(9.0 * i, 9.0 * i + 9, i != 8, true));
  CHECK(accuracy(recs) == doctest::Approx(11.0 / 13.0));
  CHECK(false_positive_rate(recs) == doctest::Approx(1.0 / 8.0));
  CHECK_THROWS_AS(accuracy({}), PreconditionError);
  CHECK(false_positive_rate({record(0, 9, true, true)}) == 0.0);
}

TEST_CASE("detection delay examples") {
  const auto g = truth_with_onsets({72.0}, 200);
  std::vector<RunRecord> recs;
  for (int i = 0; i < 20; ++i) recs.push_back(record(9.0 * i, 9.0 * i + 9, false, 9.0 * i >= 72));

  recs[7].verdict.drift = true;  // [63, 72) ends at the onset: does not count
  CHECK(std::isinf(detection_delay(recs, g)));
  recs[8].verdict.drift = true;  // [72, 81)
  CHECK(detection_delay(recs, g) == doctest::Approx(9.0));
  recs[8].verdict.drift = false;
  recs[10].verdict.drift = true;  // [90, 99)
  CHECK(detection_delay(recs, g) == doctest::Approx(27.0));

  const auto two = truth_with_onsets({72.0, 150.0}, 200);
  CHECK(std::isinf(detection_delay(recs, two)));
  recs[17].verdict.drift = true;  // [153, 162)
  CHECK(detection_delay(recs, two) == doctest::Approx((27.0 + 12.0) / 2));
  CHECK_THROWS_AS(detection_delay(recs, truth_with_onsets({}, 200)), PreconditionError);
}

TEST_CASE("compute time statistics") {
  std::vector<RunRecord> recs(3);
  recs[0].compute_time = 1.0;
  recs[1].compute_time = 2.0;
  recs[2].compute_time = 6.0;
  const auto s = compute_time_stats(recs);
  CHECK(s.mean == doctest::Approx(3.0));
  CHECK(s.max == 6.0);
  CHECK_THROWS_AS(compute_time_stats({}), PreconditionError);
}

TEST_CASE("run_scenario record arithmetic") {
  const auto spec = small_spec();
  const std::vector<DetectorConfig> configs = {config(ModelType::Dbscan), config(ModelType::Greedy)};
  const auto run = run_scenario(spec, configs);
  // 216 samples → 24 batches; 5 train from t = 0, 19 evaluated per config.
  CHECK(run.series.size() == 216);
  CHECK(run.records.size() == 2 * 19);
  const auto recs = records_for(run, 1);
  REQUIRE(recs.size() == 19);
  CHECK(recs.front().batch_index == 5);
  CHECK(recs.front().batch_start_t == 45.0);
  for (const auto& r : recs) {
    CHECK(r.model == ModelType::Greedy);
    CHECK(r.truth == (r.batch_start_t >= 90.0));
    CHECK(r.compute_time >= 0.0);
  }
}

TEST_CASE("training starts at the first Fulfillment batch") {
  scenario::ScenarioSpec s = small_spec();
  s.phases.insert(s.phases.begin(), PhaseSpec::steady(PhaseKind::Normal, 40, 500));
  const auto [series, truth] = scenario::generate(s);
  const auto batches = telemetry::batchify(series);
  CHECK(training_start(batches, truth, {}) == 5);  // first batch at or after t = 40 starts at 45

  Protocol p;
  p.train_window_batches = 20;
  CHECK_THROWS_AS(training_start(batches, truth, p), Error);
}

TEST_CASE("a drift-free tail yields only negative truth labels") {
  scenario::ScenarioSpec s;
  s.intent_tag = "calm";
  s.phases = {PhaseSpec::steady(PhaseKind::Fulfillment, 90, 1000), PhaseSpec::steady(PhaseKind::Normal, 180, 1000)};
  const auto run = run_scenario(s, {config(ModelType::Greedy)});
  for (const auto& r : run.records) CHECK_FALSE(r.truth);
  CHECK_THROWS_AS(compare_models({s}, {config(ModelType::Greedy)}, 1, 1), PreconditionError);
}

TEST_CASE("dbscan catches the qos drift") {
  const auto run = run_scenario(scenario::preset_qos(), {config(ModelType::Dbscan)});
  const auto hit = std::any_of(run.records.begin(), run.records.end(),
                               [](const RunRecord& r) { return r.truth && r.verdict.drift; });
  CHECK(hit);
}

TEST_CASE("memory accounting orders quadratic engines above linear ones") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(1000, 30);
  telemetry::Batch train, test;
  train.values.resize(256);
  test.values.resize(256);
  for (auto& v : train.values) v = noise(rng);
  for (auto& v : test.values) v = noise(rng);
  const auto ap = measure_memory(config(ModelType::AffinityPropagation), train, test);
  const auto greedy = measure_memory(config(ModelType::Greedy), train, test);
  const double m = 512;
  CHECK(static_cast<double>(ap.peak_bytes) >= 3 * m * m * 8);
  CHECK(greedy.peak_bytes < 4096);
  CHECK(ap.estimated == !alloc::hook_available());
}

TEST_CASE("summaries average per-run values") {
  RunMetrics a, b;
  a.model = b.model = "dbscan";
  a.accuracy = 1.0;
  b.accuracy = 0.5;
  a.detection_delay = 9;
  b.detection_delay = 27;
  a.peak_memory_bytes = 10;
  b.peak_memory_bytes = 30;
  a.correct_batches = 4;
  b.correct_batches = 2;
  a.total_batches = b.total_batches = 4;
  auto s = summarize({a, b});
  CHECK(s.runs == 2);
  CHECK(s.accuracy == 0.75);
  CHECK(s.avg_detection_delay == 18);
  CHECK(s.max_detection_delay == 27);
  CHECK(s.peak_memory_bytes == 30);
  CHECK(s.correct_batches == 6);
  CHECK(s.total_batches == 8);
  b.detection_delay = std::numeric_limits<double>::infinity();
  CHECK(std::isinf(summarize({a, b}).avg_detection_delay));
}

TEST_CASE("compare_models shape, determinism and reporting") {
  const std::vector<scenario::ScenarioSpec> scenarios = {small_spec(), scenario::preset_qos()};
  const std::vector<DetectorConfig> configs = {config(ModelType::Dbscan), config(ModelType::Greedy),
                                               config(ModelType::Dbscan)};
  const auto r1 = compare_models(scenarios, configs, 3, 10);
  CHECK(r1.runs.size() == 2 * 3 * 3);
  CHECK(r1.models.size() == 3);
  CHECK(r1.by_scenario.size() == 3 * 2);
  CHECK(r1.models[0].model == "dbscan#0");
  CHECK(r1.models[2].model == "dbscan#2");
  CHECK(r1.models[0].runs == 6);
  CHECK(r1.timelines.size() == 2);
  for (const char* metric : {"accuracy", "false_positive_rate", "avg_detection_delay", "avg_compute_time",
                             "peak_memory_bytes"})
    CHECK(r1.rankings.at(metric).size() == 3);

  const auto r2 = compare_models(scenarios, configs, 3, 10);
  for (std::size_t i = 0; i < r1.models.size(); ++i) {
    CHECK(r1.models[i].accuracy == r2.models[i].accuracy);
    CHECK(r1.models[i].false_positive_rate == r2.models[i].false_positive_rate);
    CHECK(r1.models[i].correct_batches == r2.models[i].correct_batches);
  }
  // Identical configs see identical series, so their verdicts agree.
  CHECK(r1.models[0].accuracy == r1.models[2].accuracy);

  const auto dir = std::filesystem::temp_directory_path() / "driftwatch_test_report";
  std::filesystem::remove_all(dir);
  emit_report(r1, dir);
  const auto csv = slurp(dir / "report.csv");
  CHECK(csv.rfind("model,metric,value\n", 0) == 0);
  CHECK(count_lines(csv) == 1 + 3 * 11);

  const auto doc = nlohmann::json::parse(slurp(dir / "report.json"));
  const auto back = doc.get<BenchReport>();
  REQUIRE(back.models.size() == r1.models.size());
  for (std::size_t i = 0; i < r1.models.size(); ++i) {
    CHECK(back.models[i].accuracy == r1.models[i].accuracy);
    CHECK(back.models[i].avg_detection_delay == r1.models[i].avg_detection_delay);
  }
  CHECK(back.rankings == r1.rankings);
  CHECK(doc.at("config").at("repetitions") == 3);

  const auto timeline = slurp(dir / "timeline_greedy.csv");
  CHECK(timeline.rfind("scenario,seed,t,value,truth,verdict\n", 0) == 0);
  std::size_t samples = 0;
  for (const auto& run : r1.timelines) samples += run.series.size();
  CHECK(count_lines(timeline) == 1 + samples);
  CHECK(std::filesystem::exists(dir / "timeline_dbscan_0.csv"));

  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(emit_report(r1, "/proc/driftwatch/nope"), Error);
  CHECK(render_rankings(r1).find("calibration") != std::string::npos);
}

TEST_CASE("protocol validation and JSON") {
  Protocol p;
  p.batch_len = 0;
  CHECK_THROWS_AS(validate(p), PreconditionError);
  p = Protocol{};
  p.refit_every = 3;
  CHECK(nlohmann::json(p).get<Protocol>().refit_every == 3);
}

TEST_CASE("refitting keeps one record per evaluated batch") {
  Protocol p;
  p.refit_every = 4;
  const auto run = run_scenario(small_spec(), {config(ModelType::KMeans)}, p);
  CHECK(run.records.size() == 19);
}

TEST_CASE("verdict metrics do not depend on the thread count") {
  const std::vector<scenario::ScenarioSpec> scenarios = {small_spec(), scenario::preset_security()};
  const std::vector<DetectorConfig> configs = {config(ModelType::Dbscan), config(ModelType::KMeans)};
  Protocol serial;
  serial.threads = 1;
  Protocol parallel;
  parallel.threads = 4;
  const auto a = compare_models(scenarios, configs, 3, 20, serial);
  const auto b = compare_models(scenarios, configs, 3, 20, parallel);
  REQUIRE(a.runs.size() == b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].model == b.runs[i].model);
    CHECK(a.runs[i].seed == b.runs[i].seed);
    CHECK(a.runs[i].accuracy == b.runs[i].accuracy);
    CHECK(a.runs[i].false_positive_rate == b.runs[i].false_positive_rate);
    CHECK(a.runs[i].detection_delay == b.runs[i].detection_delay);
  }
}
