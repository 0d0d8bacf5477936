#pragma once

#include <vector>

#include "skynomad/types.hpp"

namespace skynomad {

struct ProgressSnapshot {
  double t = 0;          // hours since job start
  double p = 0;          // completed work, hours
  double total_work = 0; // P
  double deadline = 0;   // T

  // Remaining work over remaining time.
  double pressure() const { return (total_work - p) / (deadline - t); }
  // Completed work over elapsed time; undefined at t = 0.
  double average_progress() const { return p / t; }
};

// Monetary value per hour of future progress, anchored at the cheapest
// on-demand price: V = c_od_min * pressure / average_progress. At t = 0 the
// job is exactly on schedule, so V = c_od_min; while no progress exists yet
// the nominal rate P/T stands in for the undefined average.
double value_of_progress(const ProgressSnapshot& snap, double c_od_min);

struct CandidateState {
  RegionId region = -1;
  Mode mode = Mode::idle;
  double price = 0;               // $/hr at decision time
  double predicted_lifetime = 0;  // hours; +inf for on-demand and idle
  double migration = 0;           // one-time egress from the checkpoint home
};

// Net utility per hour: V*eta - price - migration/lifetime for spot (eta is
// the fraction of the lifetime left after cold start), V - price for
// on-demand (migration fully amortized), exactly 0 for idle.
double utility(const CandidateState& cand, double value_per_hour, double cold_start_hours);

struct RankedCandidate {
  CandidateState state;
  double utility;
};

// Candidates whose utility beats the current state's by more than the
// hysteresis margin, best first. Ties break toward lower price, then lower
// region index, so the order is independent of input permutation.
std::vector<RankedCandidate> rank_candidates(const std::vector<CandidateState>& candidates,
                                             double value_per_hour, double cold_start_hours,
                                             const CandidateState& current, double hysteresis);

}  // namespace skynomad
