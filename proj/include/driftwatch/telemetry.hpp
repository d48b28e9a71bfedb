#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace driftwatch::telemetry {

/// One ingress-throughput reading: `t` seconds since series start, `value` in kb/s.
struct ThroughputSample {
  double t = 0.0;
  double value = 0.0;

  friend bool operator==(const ThroughputSample&, const ThroughputSample&) = default;
};

/// Time-ordered throughput measurements. Timestamps strictly increase.
struct Series {
  std::vector<ThroughputSample> samples;
  std::string meta;

  bool empty() const noexcept { return samples.empty(); }
  std::size_t size() const noexcept { return samples.size(); }

  /// End of the covered time span: last timestamp plus the median sample spacing.
  double span_end() const;

  Eigen::VectorXd values() const;

  friend bool operator==(const Series& a, const Series& b) { return a.samples == b.samples; }
};

/// A contiguous window [start_t, end_t) of throughput values; the unit a detector sees.
struct Batch {
  double start_t = 0.0;
  double end_t = 0.0;
  Eigen::VectorXd values;

  double midpoint() const noexcept { return 0.5 * (start_t + end_t); }
};

struct BatchStats {
  double mean = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
};

/// Throws ParseError when the samples break the Series invariants.
void validate(const Series& series);

/// Parses `t_seconds,throughput_kbps` records, one per line. A first line whose
/// first column is not numeric is treated as a header and skipped.
Series ingest_csv(std::istream& in, std::string meta = {});
Series ingest_csv(std::string_view text, std::string meta = {});
Series read_csv_file(const std::string& path);

/// Writes `t,kbps` header plus records with shortest round-trip formatting.
void write_csv(std::ostream& out, const Series& series);
std::string render_csv(const Series& series);

/// Cuts windows [i·stride, i·stride + batch_len). Windows that extend past
/// `series.span_end()` or contain no samples are dropped.
std::vector<Batch> batchify(const Series& series, double batch_len = 9.0, double stride = 9.0);

/// Treats the whole series as one batch.
Batch as_batch(const Series& series);

BatchStats batch_stats(const Eigen::Ref<const Eigen::VectorXd>& values);
inline BatchStats batch_stats(const Batch& batch) { return batch_stats(batch.values); }

/// Concatenates batch values in order.
Eigen::VectorXd concat_values(const std::vector<Batch>& batches);

}  // namespace driftwatch::telemetry
