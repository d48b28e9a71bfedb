#include <doctest.h>

#include <cmath>

#include "driftwatch/error.hpp"
#include "driftwatch/scenario.hpp"

using namespace driftwatch;
using namespace driftwatch::scenario;

namespace {

PhaseSpec quiet(PhaseKind kind, double duration, double level) {
  PhaseSpec p = PhaseSpec::steady(kind, duration, level);
  p.noise_std = 0.0;
  return p;
}

ScenarioSpec four_phase() {
  ScenarioSpec s;
  s.intent_tag = "t";
  s.phases = {quiet(PhaseKind::Normal, 20, 500), quiet(PhaseKind::Fulfillment, 30, 100),
              PhaseSpec::drift(40, 100, 300, 0), quiet(PhaseKind::Failure, 10, 500)};
  s.phases[2].noise_std = 0.0;
  return s;
}

}  // namespace

TEST_CASE("noise-free steady phase is exact") {
  ScenarioSpec s;
  s.phases = {quiet(PhaseKind::Normal, 10, 100)};
  const auto [series, truth] = generate(s);
  REQUIRE(series.size() == 10);
  for (const auto& x : series.samples) CHECK(x.value == 100.0);
  CHECK(truth.span == 10.0);
}

TEST_CASE("drift ramp follows linear interpolation") {
  ScenarioSpec s;
  PhaseSpec d = PhaseSpec::drift(60, 100, 400, 0);
  d.noise_std = 0.0;
  s.phases = {d};
  const auto [series, truth] = generate(s);
  REQUIRE(series.size() == 60);
  CHECK(series.samples[30].value == doctest::Approx(250.0).epsilon(1e-12));
}

TEST_CASE("noise-free series equals the piecewise level function") {
  const auto [series, truth] = generate(four_phase());
  for (const auto& x : series.samples) {
    double expected = 0.0;
    if (x.t < 20) expected = 500;
    else if (x.t < 50) expected = 100;
    else if (x.t < 90) expected = 100 + 200 * (x.t - 50) / 40;
    else expected = 500;
    CHECK(x.value == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("generation is deterministic per seed") {
  auto spec = preset_qos();
  spec.seed = 42;
  const auto a = generate(spec);
  const auto b = generate(spec);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  spec.seed = 43;
  CHECK_FALSE(generate(spec).first == a.first);
}

TEST_CASE("ground truth matches cumulative durations") {
  for (const auto& spec : {preset_security(), preset_qos(), four_phase()}) {
    const auto [series, truth] = generate(spec);
    REQUIRE(truth.boundaries.size() == spec.phases.size());
    double t = 0.0;
    for (std::size_t i = 0; i < spec.phases.size(); ++i) {
      CHECK(truth.boundaries[i].start_t == t);
      CHECK(truth.boundaries[i].kind == spec.phases[i].kind);
      t += spec.phases[i].duration;
    }
    CHECK(truth.span == spec.total_duration());
    CHECK(series.samples.back().t < truth.span);
  }
}

TEST_CASE("values are never negative") {
  ScenarioSpec s;
  PhaseSpec p = PhaseSpec::steady(PhaseKind::Normal, 500, 1.0);
  p.noise_std = 5.0;
  s.phases = {p};
  for (const auto& x : generate(s).first.samples) CHECK(x.value >= 0.0);
}

TEST_CASE("drift fluctuation stays within the amplitude") {
  ScenarioSpec s;
  PhaseSpec d = PhaseSpec::drift(300, 1000, 1000, 50);
  d.end_level = 1000;
  d.noise_std = 0.0;
  s.phases = {d};
  s.seed = 9;
  bool moved = false;
  for (const auto& x : generate(s).first.samples) {
    CHECK(std::abs(x.value - 1000.0) <= 50.0 + 1e-9);
    moved = moved || x.value != 1000.0;
  }
  CHECK(moved);
}

TEST_CASE("security preset shape") {
  const auto s = preset_security();
  REQUIRE(s.phases.size() == 4);
  CHECK(s.phases[0].kind == PhaseKind::Normal);
  CHECK(s.phases[1].kind == PhaseKind::Fulfillment);
  CHECK(s.phases[2].kind == PhaseKind::Drift);
  CHECK(s.phases[3].kind == PhaseKind::Failure);
  CHECK(s.phases[1].duration >= 120.0);  // attack mitigated for over 120 s
  CHECK(s.phases[0].spike_duration > 0.0);
  CHECK(generate(s).second.boundaries.size() >= 4);
}

TEST_CASE("qos preset shape") {
  const auto s = preset_qos();
  const auto truth = generate(s).second;
  CHECK(truth.boundaries[1].kind == PhaseKind::Fulfillment);
  CHECK(truth.boundaries[1].start_t == doctest::Approx(180.0).epsilon(0.05));  // fulfillment from ~180 s
  CHECK(truth.drift_onsets().at(0) == doctest::Approx(400.0).epsilon(0.05));   // drift noticed ~400 s
  for (const auto& p : s.phases) CHECK(p.duration > 0.0);
}

TEST_CASE("label_batch uses the batch midpoint") {
  const auto truth = generate(four_phase()).second;
  auto batch = [](double a, double b) {
    telemetry::Batch x;
    x.start_t = a;
    x.end_t = b;
    x.values = Eigen::VectorXd::Ones(1);
    return x;
  };
  CHECK_FALSE(label_batch(batch(25, 34), truth));  // inside Fulfillment
  CHECK(label_batch(batch(55, 64), truth));        // inside Drift
  CHECK(label_batch(batch(46, 56), truth));        // straddles, midpoint 51 in Drift
  CHECK_FALSE(label_batch(batch(42, 52), truth));  // straddles, midpoint 47 in Fulfillment
  CHECK(label_batch(batch(91, 100), truth));       // Failure
  CHECK_THROWS_AS(label_batch(batch(95, 105), truth), Error);
}

TEST_CASE("label_batch agrees with boundaries for every placement") {
  const auto truth = generate(four_phase()).second;
  for (double start = 0.0; start + 9.0 <= truth.span; start += 0.5) {
    telemetry::Batch b;
    b.start_t = start;
    b.end_t = start + 9.0;
    const double mid = start + 4.5;
    CHECK(label_batch(b, truth) == (mid >= 50.0));
  }
}

TEST_CASE("phase invariants are enforced") {
  ScenarioSpec s;
  CHECK_THROWS_AS(validate(s), PreconditionError);
  PhaseSpec p = PhaseSpec::steady(PhaseKind::Normal, 10, 100);
  p.end_level = 200;
  s.phases = {p};
  CHECK_THROWS_AS(generate(s), PreconditionError);
  p = PhaseSpec::steady(PhaseKind::Failure, 10, 100);
  p.fluctuation_amp = 3;
  s.phases = {p};
  CHECK_THROWS_AS(validate(s), PreconditionError);
  s.phases = {PhaseSpec::steady(PhaseKind::Normal, 0, 100)};
  CHECK_THROWS_AS(validate(s), PreconditionError);
  s.phases = {PhaseSpec::steady(PhaseKind::Normal, 5, 100)};
  s.sample_period = 0;
  CHECK_THROWS_AS(validate(s), PreconditionError);
  CHECK_THROWS_AS(preset("wan"), Error);
}

TEST_CASE("scenario JSON round trip") {
  for (const auto& spec : {preset_security(), preset_qos(), four_phase()}) {
    const nlohmann::json j = spec;
    CHECK(j.get<ScenarioSpec>() == spec);
    const nlohmann::json t = generate(spec).second;
    CHECK(t.get<GroundTruth>() == generate(spec).second);
  }
}

TEST_CASE("minimal JSON spec fills defaults") {
  const auto j = nlohmann::json::parse(R"({"intent_tag":"x","seed":3,
    "phases":[{"kind":"Normal","duration":5,"base_level":200}]})");
  const auto s = j.get<ScenarioSpec>();
  CHECK(s.phases[0].end_level == 200.0);
  CHECK(s.phases[0].noise_std == doctest::Approx(10.0));
  CHECK(s.sample_period == 1.0);
  CHECK_THROWS(nlohmann::json::parse(R"({"phases":[{"kind":"Sideways","duration":5,"base_level":1}]})")
                   .get<ScenarioSpec>());
}
