#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "skynomad/market.hpp"
#include "skynomad/policy.hpp"
#include "skynomad/trace.hpp"

namespace skynomad {

struct ModeTime {
  double spot = 0, od = 0, idle = 0, cold_start = 0;
  double sum() const { return spot + od + idle + cold_start; }
};

struct StepRecord {
  double t;
  Mode mode;      // occupancy during [t, t+dt)
  RegionId region;
};

struct SimEvent {
  double t;
  std::string kind;
  RegionId region = -1;
  double amount = 0;
};

struct DecisionRecord {
  double t;
  Decision decision;
};

struct RunReport {
  std::string policy;
  uint64_t seed = 0;
  std::string config_hash;
  double start_offset_hours = 0;

  double total_cost = 0, compute_cost = 0, egress_cost = 0, probe_cost = 0;
  bool completed = false;
  bool deadline_met = false;
  double finish_time = 0;
  int migrations = 0;
  ModeTime mode_time;
  double selection_accuracy = std::numeric_limits<double>::quiet_NaN();
  double region_overlap_with_optimal = std::numeric_limits<double>::quiet_NaN();

  CostLedger ledger;
  std::vector<StepRecord> steps;
  std::vector<SimEvent> events;
  std::vector<DecisionRecord> decisions;

  nlohmann::ordered_json to_json(bool include_logs = true) const;
  std::string serialize(bool include_logs = true) const;
  void write_events_jsonl(std::ostream& os) const;
  void write_decisions_jsonl(std::ostream& os) const;
};

// Fraction of spot-running steps spent in the cheapest spot-available region;
// NaN when the policy never ran on spot.
double compute_selection_accuracy(const RunReport& report, const Trace& trace,
                                  const PriceBook& book, double start_offset_hours);

// Fraction of steps, among those where both runs hold an instance, spent in
// the same region.
double region_overlap(const RunReport& a, const RunReport& b);

}  // namespace skynomad
