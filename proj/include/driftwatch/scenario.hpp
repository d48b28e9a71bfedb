#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "driftwatch/telemetry.hpp"

namespace driftwatch::scenario {

enum class PhaseKind { Normal, Fulfillment, Drift, Failure };

std::string_view to_string(PhaseKind kind);
PhaseKind phase_kind_from_string(std::string_view name);

/// True for the phases a detector is expected to flag.
constexpr bool is_degraded(PhaseKind kind) {
  return kind == PhaseKind::Drift || kind == PhaseKind::Failure;
}

/// One segment of an intent life cycle.
///
/// The level is `base_level`, except in a Drift phase where it ramps linearly to
/// `end_level` and carries a bounded random-walk fluctuation of at most
/// `fluctuation_amp`. Every sample gets Gaussian noise of `noise_std`.
///
/// Two optional traits shape the presets: `burst_prob` is the per-sample chance
/// of a one-sample traffic burst adding `burst_gain · level · U(0.5, 1)`, and a
/// positive `spike_duration` holds the final seconds of the phase at
/// `spike_level` (an attack spike at the end of a Normal phase).
struct PhaseSpec {
  PhaseKind kind = PhaseKind::Normal;
  double duration = 0.0;
  double base_level = 0.0;
  double end_level = 0.0;
  double noise_std = 0.0;
  double fluctuation_amp = 0.0;
  double burst_prob = 0.0;
  double burst_gain = 0.0;
  double spike_level = 0.0;
  double spike_duration = 0.0;

  /// Constant-level phase with the default noise of 5% of `level`.
  static PhaseSpec steady(PhaseKind kind, double duration, double level);
  /// Drift ramp from `from` to `to` with default noise of 5% of `from`.
  static PhaseSpec drift(double duration, double from, double to, double fluctuation_amp);

  friend bool operator==(const PhaseSpec&, const PhaseSpec&) = default;
};

struct ScenarioSpec {
  std::string intent_tag;
  std::vector<PhaseSpec> phases;
  double sample_period = 1.0;
  std::uint64_t seed = 1;

  double total_duration() const;

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

struct Boundary {
  double start_t = 0.0;
  PhaseKind kind = PhaseKind::Normal;

  friend bool operator==(const Boundary&, const Boundary&) = default;
};

/// Phase start times of a generated scenario; `span` is the total duration.
struct GroundTruth {
  std::vector<Boundary> boundaries;
  double span = 0.0;

  PhaseKind kind_at(double t) const;
  /// Start times of every Drift phase.
  std::vector<double> drift_onsets() const;
  /// [start, end) of the `index`-th phase.
  std::pair<double, double> phase_span(std::size_t index) const;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// Throws PreconditionError on any invariant violation.
void validate(const PhaseSpec& phase);
void validate(const ScenarioSpec& spec);

/// Deterministic for a fixed `spec.seed`; one sample every `sample_period`
/// seconds from t = 0 while t < total duration.
std::pair<telemetry::Series, GroundTruth> generate(const ScenarioSpec& spec);

/// Intent B: DDoS mitigation restricting ingress traffic to a host.
ScenarioSpec preset_security();
/// Intent D: QoS intent minimising ingress bandwidth to a host.
ScenarioSpec preset_qos();
/// Looks up "security" or "qos"; throws Error otherwise.
ScenarioSpec preset(std::string_view name);

/// True iff the batch midpoint lies in a Drift or Failure phase.
bool label_batch(const telemetry::Batch& batch, const GroundTruth& truth);

void to_json(nlohmann::json& j, const PhaseSpec& p);
void from_json(const nlohmann::json& j, PhaseSpec& p);
void to_json(nlohmann::json& j, const ScenarioSpec& s);
void from_json(const nlohmann::json& j, ScenarioSpec& s);
void to_json(nlohmann::json& j, const GroundTruth& g);
void from_json(const nlohmann::json& j, GroundTruth& g);

}  // namespace driftwatch::scenario
