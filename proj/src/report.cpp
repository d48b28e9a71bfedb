#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "driftwatch/bench.hpp"
#include "driftwatch/error.hpp"

namespace driftwatch::bench {
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

json delay_json(double d) { return std::isinf(d) ? json(nullptr) : json(d); }

double delay_from(const json& j) { return j.is_null() ? kInf : j.get<double>(); }

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_sink(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void close_sink(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

// Filename-safe form of a model label such as "dbscan#2".
std::string file_stem(std::string label) {
  for (char& c : label)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) c = '_';
  return label;
}

}  // namespace

void to_json(json& j, const RunMetrics& m) {
  j = {{"model", m.model},
       {"scenario", m.scenario},
       {"seed", m.seed},
       {"accuracy", m.accuracy},
       {"false_positive_rate", m.false_positive_rate},
       {"detection_delay", delay_json(m.detection_delay)},
       {"mean_compute_time", m.mean_compute_time},
       {"max_compute_time", m.max_compute_time},
       {"peak_memory_bytes", m.peak_memory_bytes},
       {"memory_estimated", m.memory_estimated},
       {"correct_batches", m.correct_batches},
       {"total_batches", m.total_batches}};
}

void from_json(const json& j, RunMetrics& m) {
  j.at("model").get_to(m.model);
  j.at("scenario").get_to(m.scenario);
  j.at("seed").get_to(m.seed);
  j.at("accuracy").get_to(m.accuracy);
  j.at("false_positive_rate").get_to(m.false_positive_rate);
  m.detection_delay = delay_from(j.at("detection_delay"));
  j.at("mean_compute_time").get_to(m.mean_compute_time);
  j.at("max_compute_time").get_to(m.max_compute_time);
  j.at("peak_memory_bytes").get_to(m.peak_memory_bytes);
  j.at("memory_estimated").get_to(m.memory_estimated);
  j.at("correct_batches").get_to(m.correct_batches);
  j.at("total_batches").get_to(m.total_batches);
}

void to_json(json& j, const ModelSummary& s) {
  j = {{"model", s.model},
       {"runs", s.runs},
       {"accuracy", s.accuracy},
       {"false_positive_rate", s.false_positive_rate},
       {"avg_detection_delay", delay_json(s.avg_detection_delay)},
       {"max_detection_delay", delay_json(s.max_detection_delay)},
       {"avg_compute_time", s.avg_compute_time},
       {"max_compute_time", s.max_compute_time},
       {"peak_memory_bytes", s.peak_memory_bytes},
       {"memory_estimated", s.memory_estimated},
       {"correct_batches", s.correct_batches},
       {"total_batches", s.total_batches}};
  if (!s.scenario.empty()) j["scenario"] = s.scenario;
}

void from_json(const json& j, ModelSummary& s) {
  j.at("model").get_to(s.model);
  s.scenario = j.value("scenario", std::string{});
  j.at("runs").get_to(s.runs);
  j.at("accuracy").get_to(s.accuracy);
  j.at("false_positive_rate").get_to(s.false_positive_rate);
  s.avg_detection_delay = delay_from(j.at("avg_detection_delay"));
  s.max_detection_delay = delay_from(j.at("max_detection_delay"));
  j.at("avg_compute_time").get_to(s.avg_compute_time);
  j.at("max_compute_time").get_to(s.max_compute_time);
  j.at("peak_memory_bytes").get_to(s.peak_memory_bytes);
  j.at("memory_estimated").get_to(s.memory_estimated);
  j.at("correct_batches").get_to(s.correct_batches);
  j.at("total_batches").get_to(s.total_batches);
}

void to_json(json& j, const BenchReport& r) {
  j = {{"models", r.models},
       {"by_scenario", r.by_scenario},
       {"runs", r.runs},
       {"rankings", r.rankings},
       {"calibration", {{"ok", r.calibration.ok}, {"detail", r.calibration.detail}}},
       {"config", r.config_echo}};
}

void from_json(const json& j, BenchReport& r) {
  r = BenchReport{};
  j.at("models").get_to(r.models);
  j.at("by_scenario").get_to(r.by_scenario);
  j.at("runs").get_to(r.runs);
  j.at("rankings").get_to(r.rankings);
  j.at("calibration").at("ok").get_to(r.calibration.ok);
  j.at("calibration").at("detail").get_to(r.calibration.detail);
  r.config_echo = j.at("config");
}

void emit_report(const BenchReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw Error("cannot create report directory " + dir.string());

  {
    const auto path = dir / "report.json";
    auto out = open_sink(path);
    out << json(report).dump(2) << '\n';
    close_sink(out, path);
  }
  {
    const auto path = dir / "report.csv";
    auto out = open_sink(path);
    out << "model,metric,value\n";
    for (const auto& m : report.models) {
      auto row = [&](const char* metric, const std::string& value) {
        out << m.model << ',' << metric << ',' << value << '\n';
      };
      row("runs", std::to_string(m.runs));
      row("accuracy", number(m.accuracy));
      row("false_positive_rate", number(m.false_positive_rate));
      row("avg_detection_delay", number(m.avg_detection_delay));
      row("max_detection_delay", number(m.max_detection_delay));
      row("avg_compute_time", number(m.avg_compute_time));
      row("max_compute_time", number(m.max_compute_time));
      row("peak_memory_bytes", std::to_string(m.peak_memory_bytes));
      row("memory_estimated", m.memory_estimated ? "true" : "false");
      row("correct_batches", std::to_string(m.correct_batches));
      row("total_batches", std::to_string(m.total_batches));
    }
    close_sink(out, path);
  }

  // Timelines: one row per generated sample of the first repetition of each
  // scenario. The verdict column is empty for samples outside evaluated batches.
  for (std::size_t ci = 0; ci < report.models.size(); ++ci) {
    const auto path = dir / ("timeline_" + file_stem(report.models[ci].model) + ".csv");
    auto out = open_sink(path);
    out << "scenario,seed,t,value,truth,verdict\n";
    for (const auto& run : report.timelines) {
      const auto recs = records_for(run, ci);
      std::size_t cursor = 0;
      for (const auto& s : run.series.samples) {
        while (cursor < recs.size() && recs[cursor].batch_end_t <= s.t) ++cursor;
        const bool covered = cursor < recs.size() && recs[cursor].batch_start_t <= s.t;
        const bool truth = scenario::is_degraded(run.truth.kind_at(s.t));
        out << run.spec.intent_tag << ',' << run.spec.seed << ',' << number(s.t) << ',' << number(s.value) << ','
            << (truth ? 1 : 0) << ',';
        if (covered) out << (recs[cursor].verdict.drift ? 1 : 0);
        out << '\n';
      }
    }
    close_sink(out, path);
  }
}

std::string render_rankings(const BenchReport& report) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "model" << std::right << std::setw(10) << "accuracy" << std::setw(8) << "fpr"
     << std::setw(11) << "delay_s" << std::setw(13) << "compute_ms" << std::setw(14) << "peak_bytes" << '\n';
  for (const auto& name : report.rankings.at("accuracy")) {
    for (const auto& m : report.models) {
      if (m.model != name) continue;
      os << std::left << std::setw(14) << m.model << std::right << std::fixed << std::setprecision(3)
         << std::setw(10) << m.accuracy << std::setw(8) << m.false_positive_rate << std::setw(11)
         << std::setprecision(1) << m.avg_detection_delay << std::setw(13) << std::setprecision(3)
         << m.avg_compute_time * 1e3 << std::setw(14) << m.peak_memory_bytes
         << (m.memory_estimated ? " (est.)" : "") << '\n';
    }
  }
  os << "calibration: " << (report.calibration.ok ? "ok" : "FAILED") << " (" << report.calibration.detail << ")\n";
  return os.str();
}

}  // namespace driftwatch::bench
