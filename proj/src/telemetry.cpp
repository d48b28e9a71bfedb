#include "driftwatch/telemetry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "driftwatch/error.hpp"

namespace driftwatch::telemetry {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

double Series::span_end() const {
  if (samples.empty()) return 0.0;
  if (samples.size() == 1) return samples.front().t;
  std::vector<double> gaps(samples.size() - 1);
  for (std::size_t i = 1; i < samples.size(); ++i) gaps[i - 1] = samples[i].t - samples[i - 1].t;
  auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  return samples.back().t + *mid;
}

Eigen::VectorXd Series::values() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) v[static_cast<Eigen::Index>(i)] = samples[i].value;
  return v;
}

void validate(const Series& series) {
  if (series.samples.empty()) throw ParseError("series is empty", 0);
  for (std::size_t i = 0; i < series.samples.size(); ++i) {
    const auto& s = series.samples[i];
    if (!(s.t >= 0.0)) throw ParseError("negative timestamp", i + 1);
    if (!(s.value >= 0.0)) throw ParseError("negative throughput", i + 1);
    if (i > 0 && !(s.t > series.samples[i - 1].t))
      throw ParseError("timestamps must be strictly increasing", i + 1);
  }
}

Series ingest_csv(std::istream& in, std::string meta) {
  Series series;
  series.meta = std::move(meta);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    const auto comma = line.find(',');
    const std::string_view first = comma == std::string_view::npos ? line : line.substr(0, comma);
    auto t = parse_number(first);
    if (!t && line_no == 1) continue;  // header
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos)
      throw ParseError("expected two comma-separated fields", line_no);
    auto value = parse_number(line.substr(comma + 1));
    if (!t || !value) throw ParseError("malformed number", line_no);
    if (*t < 0.0) throw ParseError("negative timestamp", line_no);
    if (*value < 0.0) throw ParseError("negative throughput", line_no);
    if (!series.samples.empty() && !(*t > series.samples.back().t))
      throw ParseError("timestamps must be strictly increasing", line_no);
    series.samples.push_back({*t, *value});
  }
  if (series.samples.empty()) throw ParseError("no samples in input", 0);
  return series;
}

Series ingest_csv(std::string_view text, std::string meta) {
  std::istringstream in{std::string(text)};
  return ingest_csv(in, std::move(meta));
}

Series read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return ingest_csv(in, path);
}

void write_csv(std::ostream& out, const Series& series) { out << render_csv(series); }

std::string render_csv(const Series& series) {
  std::string out = "t,kbps\n";
  out.reserve(out.size() + series.samples.size() * 24);
  for (const auto& s : series.samples) {
    append_number(out, s.t);
    out.push_back(',');
    append_number(out, s.value);
    out.push_back('\n');
  }
  return out;
}

std::vector<Batch> batchify(const Series& series, double batch_len, double stride) {
  require(batch_len > 0.0, "batch_len must be positive");
  require(stride > 0.0, "stride must be positive");
  std::vector<Batch> batches;
  if (series.empty()) return batches;

  constexpr double kSlack = 1e-9;
  const double end = series.span_end();
  const auto& samples = series.samples;
  auto by_time = [](const ThroughputSample& s, double t) { return s.t < t; };

  for (std::size_t i = 0;; ++i) {
    const double start = static_cast<double>(i) * stride;
    const double stop = start + batch_len;
    if (stop > end + kSlack) break;
    auto lo = std::lower_bound(samples.begin(), samples.end(), start, by_time);
    auto hi = std::lower_bound(lo, samples.end(), stop, by_time);
    if (lo == hi) continue;
    Batch b{start, stop, Eigen::VectorXd(hi - lo)};
    for (auto it = lo; it != hi; ++it) b.values[it - lo] = it->value;
    batches.push_back(std::move(b));
  }
  return batches;
}

Batch as_batch(const Series& series) {
  require(!series.empty(), "series is empty");
  double end = series.span_end();
  if (!(end > series.samples.front().t)) end = series.samples.front().t + 1.0;
  return Batch{series.samples.front().t, end, series.values()};
}

BatchStats batch_stats(const Eigen::Ref<const Eigen::VectorXd>& values) {
  require(values.size() > 0, "batch is empty");
  BatchStats s;
  s.min = values.minCoeff();
  s.max = values.maxCoeff();
  // Summation rounding can push the mean of near-equal values outside [min, max].
  s.mean = std::clamp(values.mean(), s.min, s.max);
  s.std = std::sqrt((values.array() - s.mean).square().mean());
  return s;
}

Eigen::VectorXd concat_values(const std::vector<Batch>& batches) {
  Eigen::Index n = 0;
  for (const auto& b : batches) n += b.values.size();
  Eigen::VectorXd out(n);
  Eigen::Index at = 0;
  for (const auto& b : batches) {
    out.segment(at, b.values.size()) = b.values;
    at += b.values.size();
  }
  return out;
}

}  // namespace driftwatch::telemetry
