#include "driftwatch/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "driftwatch/error.hpp"

namespace driftwatch::scenario {
namespace {

constexpr double kDefaultNoiseFraction = 0.05;
constexpr double kWalkStepFraction = 0.1;
constexpr double kTimeSlack = 1e-9;

// Calibration constants for the presets; levels in kb/s, durations in s.
constexpr double kBurstProb = 0.02;
constexpr double kBurstGain = 1.0;

PhaseSpec with_link_noise(PhaseSpec p, double noise_std) {
  p.noise_std = noise_std;
  p.burst_prob = kBurstProb;
  p.burst_gain = kBurstGain;
  return p;
}

}  // namespace

std::string_view to_string(PhaseKind kind) {
  switch (kind) {
    case PhaseKind::Normal: return "Normal";
    case PhaseKind::Fulfillment: return "Fulfillment";
    case PhaseKind::Drift: return "Drift";
    case PhaseKind::Failure: return "Failure";
  }
  return "Normal";
}

PhaseKind phase_kind_from_string(std::string_view name) {
  for (auto k : {PhaseKind::Normal, PhaseKind::Fulfillment, PhaseKind::Drift, PhaseKind::Failure})
    if (to_string(k) == name) return k;
  throw Error("unknown phase kind '" + std::string(name) + "'");
}

PhaseSpec PhaseSpec::steady(PhaseKind kind, double duration, double level) {
  PhaseSpec p;
  p.kind = kind;
  p.duration = duration;
  p.base_level = level;
  p.end_level = level;
  p.noise_std = kDefaultNoiseFraction * level;
  return p;
}

PhaseSpec PhaseSpec::drift(double duration, double from, double to, double fluctuation_amp) {
  PhaseSpec p = steady(PhaseKind::Drift, duration, from);
  p.end_level = to;
  p.fluctuation_amp = fluctuation_amp;
  return p;
}

double ScenarioSpec::total_duration() const {
  double total = 0.0;
  for (const auto& p : phases) total += p.duration;
  return total;
}

PhaseKind GroundTruth::kind_at(double t) const {
  require(!boundaries.empty(), "ground truth has no phases");
  PhaseKind kind = boundaries.front().kind;
  for (const auto& b : boundaries) {
    if (t >= b.start_t) kind = b.kind;
    else break;
  }
  return kind;
}

std::vector<double> GroundTruth::drift_onsets() const {
  std::vector<double> onsets;
  for (const auto& b : boundaries)
    if (b.kind == PhaseKind::Drift) onsets.push_back(b.start_t);
  return onsets;
}

std::pair<double, double> GroundTruth::phase_span(std::size_t index) const {
  require(index < boundaries.size(), "phase index out of range");
  const double end = index + 1 < boundaries.size() ? boundaries[index + 1].start_t : span;
  return {boundaries[index].start_t, end};
}

void validate(const PhaseSpec& p) {
  require(p.duration > 0.0, "phase duration must be positive");
  require(p.base_level >= 0.0 && p.end_level >= 0.0, "phase levels must be non-negative");
  require(p.noise_std >= 0.0, "noise_std must be non-negative");
  require(p.fluctuation_amp >= 0.0, "fluctuation_amp must be non-negative");
  require(p.burst_prob >= 0.0 && p.burst_prob <= 1.0, "burst_prob must lie in [0, 1]");
  require(p.burst_gain >= 0.0, "burst_gain must be non-negative");
  require(p.spike_level >= 0.0, "spike_level must be non-negative");
  require(p.spike_duration >= 0.0 && p.spike_duration <= p.duration,
          "spike_duration must lie in [0, duration]");
  if (p.kind != PhaseKind::Drift) {
    require(p.end_level == p.base_level, "only Drift phases may change level");
    require(p.fluctuation_amp == 0.0, "only Drift phases fluctuate");
  }
}

void validate(const ScenarioSpec& spec) {
  require(!spec.phases.empty(), "scenario has no phases");
  require(spec.sample_period > 0.0, "sample_period must be positive");
  for (const auto& p : spec.phases) validate(p);
}

std::pair<telemetry::Series, GroundTruth> generate(const ScenarioSpec& spec) {
  validate(spec);

  GroundTruth truth;
  std::vector<double> starts;
  double t0 = 0.0;
  for (const auto& p : spec.phases) {
    truth.boundaries.push_back({t0, p.kind});
    starts.push_back(t0);
    t0 += p.duration;
  }
  truth.span = t0;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  telemetry::Series series;
  series.meta = spec.intent_tag;
  std::size_t phase = 0;
  double walk = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * spec.sample_period;
    if (t >= truth.span - kTimeSlack) break;
    while (phase + 1 < spec.phases.size() && t >= starts[phase + 1] - kTimeSlack) {
      ++phase;
      walk = 0.0;
    }
    const PhaseSpec& p = spec.phases[phase];
    const double into = t - starts[phase];

    double level = p.base_level;
    if (p.kind == PhaseKind::Drift) level += (p.end_level - p.base_level) * (into / p.duration);
    if (p.spike_duration > 0.0 && into >= p.duration - p.spike_duration - kTimeSlack)
      level = p.spike_level;

    double value = level + p.noise_std * gauss(rng);
    if (p.kind == PhaseKind::Drift && p.fluctuation_amp > 0.0) {
      walk = std::clamp(walk + kWalkStepFraction * p.fluctuation_amp * gauss(rng),
                        -p.fluctuation_amp, p.fluctuation_amp);
      value += walk;
    }
    if (p.burst_prob > 0.0 && unit(rng) < p.burst_prob)
      value += p.burst_gain * level * (0.5 + 0.5 * unit(rng));

    series.samples.push_back({t, std::max(0.0, value)});
  }
  return {std::move(series), std::move(truth)};
}

ScenarioSpec preset_security() {
  constexpr double kLinkNoise = 40.0;  // 5% of the restricted level
  PhaseSpec normal = PhaseSpec::steady(PhaseKind::Normal, 140.0, 3000.0);
  normal.spike_level = 9000.0;
  normal.spike_duration = 10.0;

  ScenarioSpec s;
  s.intent_tag = "Intent-B-security";
  s.phases = {
      with_link_noise(normal, kLinkNoise),
      with_link_noise(PhaseSpec::steady(PhaseKind::Fulfillment, 130.0, 800.0), kLinkNoise),
      with_link_noise(PhaseSpec::drift(120.0, 800.0, 6000.0, 150.0), kLinkNoise),
      with_link_noise(PhaseSpec::steady(PhaseKind::Failure, 90.0, 9000.0), kLinkNoise),
  };
  return s;
}

ScenarioSpec preset_qos() {
  constexpr double kLinkNoise = 60.0;
  ScenarioSpec s;
  s.intent_tag = "Intent-D-qos";
  s.phases = {
      with_link_noise(PhaseSpec::steady(PhaseKind::Normal, 180.0, 5000.0), kLinkNoise),
      with_link_noise(PhaseSpec::steady(PhaseKind::Fulfillment, 220.0, 1200.0), kLinkNoise),
      with_link_noise(PhaseSpec::drift(90.0, 1200.0, 4500.0, 100.0), kLinkNoise),
      with_link_noise(PhaseSpec::steady(PhaseKind::Failure, 90.0, 5000.0), kLinkNoise),
  };
  return s;
}

ScenarioSpec preset(std::string_view name) {
  if (name == "security") return preset_security();
  if (name == "qos") return preset_qos();
  throw Error("unknown preset '" + std::string(name) + "' (expected security or qos)");
}

bool label_batch(const telemetry::Batch& batch, const GroundTruth& truth) {
  if (batch.start_t < -kTimeSlack || batch.end_t > truth.span + kTimeSlack)
    throw Error("batch lies outside the scenario span");
  return is_degraded(truth.kind_at(batch.midpoint()));
}

void to_json(nlohmann::json& j, const PhaseSpec& p) {
  j = {{"kind", to_string(p.kind)},
       {"duration", p.duration},
       {"base_level", p.base_level},
       {"end_level", p.end_level},
       {"noise_std", p.noise_std},
       {"fluctuation_amp", p.fluctuation_amp},
       {"burst_prob", p.burst_prob},
       {"burst_gain", p.burst_gain},
       {"spike_level", p.spike_level},
       {"spike_duration", p.spike_duration}};
}

void from_json(const nlohmann::json& j, PhaseSpec& p) {
  p.kind = phase_kind_from_string(j.at("kind").get<std::string>());
  p.duration = j.at("duration").get<double>();
  p.base_level = j.at("base_level").get<double>();
  p.end_level = j.value("end_level", p.base_level);
  p.noise_std = j.value("noise_std", kDefaultNoiseFraction * p.base_level);
  p.fluctuation_amp = j.value("fluctuation_amp", 0.0);
  p.burst_prob = j.value("burst_prob", 0.0);
  p.burst_gain = j.value("burst_gain", 0.0);
  p.spike_level = j.value("spike_level", 0.0);
  p.spike_duration = j.value("spike_duration", 0.0);
}

void to_json(nlohmann::json& j, const ScenarioSpec& s) {
  j = {{"intent_tag", s.intent_tag},
       {"phases", s.phases},
       {"sample_period", s.sample_period},
       {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, ScenarioSpec& s) {
  s.intent_tag = j.value("intent_tag", std::string{});
  s.phases = j.at("phases").get<std::vector<PhaseSpec>>();
  s.sample_period = j.value("sample_period", 1.0);
  s.seed = j.value("seed", std::uint64_t{1});
  validate(s);
}

void to_json(nlohmann::json& j, const GroundTruth& g) {
  auto bounds = nlohmann::json::array();
  for (const auto& b : g.boundaries) bounds.push_back({{"start_t", b.start_t}, {"kind", to_string(b.kind)}});
  j = {{"boundaries", bounds}, {"span", g.span}};
}

void from_json(const nlohmann::json& j, GroundTruth& g) {
  g.boundaries.clear();
  for (const auto& b : j.at("boundaries"))
    g.boundaries.push_back({b.at("start_t").get<double>(), phase_kind_from_string(b.at("kind").get<std::string>())});
  g.span = j.at("span").get<double>();
  require(!g.boundaries.empty(), "ground truth has no phases");
  require(g.boundaries.front().start_t == 0.0, "ground truth must start at t = 0");
  for (std::size_t i = 1; i < g.boundaries.size(); ++i)
    require(g.boundaries[i].start_t > g.boundaries[i - 1].start_t, "ground truth boundaries must increase");
  require(g.span > g.boundaries.back().start_t, "ground truth span must cover every phase");
}

}  // namespace driftwatch::scenario
