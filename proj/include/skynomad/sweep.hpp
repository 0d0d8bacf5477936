#pragma once

#include <iosfwd>

#include "skynomad/config.hpp"

namespace skynomad {

struct SweepCell {
  double deadline_ratio;
  int region_count;
  double ckpt_gb;
};

struct SweepRow {
  SweepCell cell{};
  std::string policy;
  int jobs = 0;
  double mean_cost = std::numeric_limits<double>::quiet_NaN();
  double stderr_cost = std::numeric_limits<double>::quiet_NaN();
  double deadline_rate = std::numeric_limits<double>::quiet_NaN();
  double mean_selection_accuracy = std::numeric_limits<double>::quiet_NaN();
  bool infeasible = false;
  std::string config_hash;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

// Regions ordered by average spot availability, most available first; the
// region-count axis adds regions in this order.
std::vector<RegionId> regions_by_availability(const Trace& trace);

// Deadline for a ratio cell: T = ratio * P, clamped up to the on-demand
// feasibility floor P + d so the near-1.0 end of the axis runs (and latches
// the safety net immediately) instead of erroring out.
double deadline_for_ratio(const JobSpec& job, double ratio);

// Cross product of deadline ratios x region counts x checkpoint sizes x
// policies x job start times. Cells run in parallel; output order is
// deterministic.
SweepResult run_sweep(const ScenarioConfig& cfg, int parallelism);

void write_matrix_csv(const SweepResult& result, std::ostream& os);

}  // namespace skynomad
