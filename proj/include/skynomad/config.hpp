#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "skynomad/baselines.hpp"
#include "skynomad/engine.hpp"
#include "skynomad/oracle.hpp"

namespace skynomad {

struct TraceSource {
  std::string path;  // empty when synthetic
  TraceFormat format = TraceFormat::csv;
  std::optional<SyntheticTraceSpec> synthetic;

  bool operator==(const TraceSource&) const = default;
};

struct SweepAxes {
  std::vector<double> deadline_ratios;
  std::vector<int> region_counts;
  std::vector<double> ckpt_sizes_gb;
  int job_count = 1;
  std::optional<double> start_spacing_hours;  // auto when unset

  bool operator==(const SweepAxes&) const = default;
};

struct ScenarioConfig {
  TraceSource trace;
  std::optional<std::string> price_path;
  JobSpec job;
  std::vector<std::string> policies{"skynomad"};
  std::vector<std::string> region_filter;  // allow-list of labels
  BaselineConfig baselines;
  SweepAxes sweep;
  SimOptions options;
  uint64_t seed = 42;
  std::string output_dir = "out";

  static ScenarioConfig from_json(const nlohmann::json& j);
  static ScenarioConfig from_file(const std::string& path);
  nlohmann::ordered_json to_json() const;
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

struct Scenario {
  Trace trace;
  PriceBook book;
};

// Load or synthesize the trace and prices and apply the region filter.
Scenario load_scenario(const ScenarioConfig& cfg);

// "up" expands to one single-region instance per region (up@label); other
// names pass through. "optimal" is handled by run_named_policy.
std::vector<std::string> expand_policy_names(const std::vector<std::string>& names,
                                             const Trace& trace);

std::unique_ptr<Policy> make_policy(const std::string& name, const Trace& trace,
                                    const BaselineConfig& cfg);

bool policy_is_optimal(const std::string& name);
bool policy_has_deadline_guarantee(const std::string& name, const BaselineConfig& cfg);

// Job start offsets on the step grid, evenly spaced over the feasible range.
std::vector<double> start_offsets(const Trace& trace, const JobSpec& job,
                                  const SimOptions& options, int job_count,
                                  std::optional<double> spacing_hours);

// Runs one policy by name ("optimal" solves the DP and replays its schedule
// through the engine).
RunReport run_named_policy(const Scenario& sc, const JobSpec& job, const std::string& name,
                           uint64_t seed, const SimOptions& options,
                           const BaselineConfig& bcfg);

}  // namespace skynomad
