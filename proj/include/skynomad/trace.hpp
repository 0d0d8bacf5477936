#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skynomad/types.hpp"

namespace skynomad {

// One region's availability samples; values are {0,1}, piecewise-constant
// between samples.
struct AvailabilitySeries {
  double interval_s = 600.0;
  double start_s = 0.0;
  std::vector<uint8_t> samples;

  bool operator==(const AvailabilitySeries&) const = default;
};

struct VolatilePeriod {
  double start_hours = 0.0;
  double duration_hours = 0.0;
  double multiplier = 1.0;

  bool operator==(const VolatilePeriod&) const = default;
};

struct SyntheticTraceSpec {
  int region_count = 8;
  double horizon_hours = 14 * 24.0;
  // Pareto tail shape; one entry broadcasts to all regions, otherwise one
  // entry per region. Must be > 1 so lifetimes have a finite mean.
  std::vector<double> lifetime_tail_exponent{1.5};
  double mean_gap_hours = 2.0;
  double diurnal_amplitude = 0.0;  // in [0,1]
  std::vector<VolatilePeriod> volatile_periods;
  double price_spread = 3.0;  // max/min spot price ratio across regions
  uint64_t seed = 0;
  double sample_interval_s = 600.0;

  void validate() const;
  double tail_exponent_for(RegionId r) const;
  double hazard_multiplier_at(double t_hours) const;

  bool operator==(const SyntheticTraceSpec&) const = default;
};

class Trace {
 public:
  Trace() = default;
  Trace(double interval_s, double start_s, std::vector<std::string> labels,
        std::vector<std::vector<uint8_t>> samples);

  int region_count() const { return static_cast<int>(labels_.size()); }
  std::size_t length() const { return samples_.empty() ? 0 : samples_[0].size(); }
  double interval_s() const { return interval_s_; }
  double start_s() const { return start_s_; }
  double interval_hours() const { return interval_s_ / 3600.0; }
  double horizon_hours() const { return static_cast<double>(length()) * interval_hours(); }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(RegionId r) const;
  RegionId region_index(const std::string& label) const;  // -1 when unknown

  // t_hours is measured from the trace start; valid on [0, horizon).
  int availability(RegionId r, double t_hours) const;
  std::size_t sample_index(double t_hours) const;
  const std::vector<uint8_t>& samples(RegionId r) const;

  double availability_fraction(RegionId r) const;
  Trace subset(const std::vector<RegionId>& keep) const;
  AvailabilitySeries series(RegionId r) const;

  bool operator==(const Trace&) const = default;

 private:
  void check_region(RegionId r) const;

  double interval_s_ = 600.0;
  double start_s_ = 0.0;
  std::vector<std::string> labels_;
  std::vector<std::vector<uint8_t>> samples_;  // [region][sample]
};

enum class TraceFormat { csv, json };

Trace load_trace(const std::string& path, TraceFormat format);
void save_trace(const Trace& trace, const std::string& path, TraceFormat format);

// Deterministic function of the spec: same spec (incl. seed), same trace.
Trace generate_trace(const SyntheticTraceSpec& spec);

// Pointwise AND of k per-instance series: the gang runs only when every
// instance runs.
AvailabilitySeries gang_aggregate(const std::vector<AvailabilitySeries>& series);

// Lengths (hours) of maximal available runs in one region's series.
std::vector<double> region_run_lengths_hours(const Trace& trace, RegionId r);

// OLS slope of log CCDF vs log length over runs in [min_len, p99]; for
// Pareto-shaped lifetimes this estimates -shape.
double fit_tail_slope(const std::vector<double>& run_lengths);

}  // namespace skynomad
