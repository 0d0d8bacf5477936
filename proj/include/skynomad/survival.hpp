#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "skynomad/observer.hpp"
#include "skynomad/types.hpp"

namespace skynomad {

// Nelson-Aalen estimate over lifetime samples. The hazard at a distinct
// duration l is e(l)/n(l) where n(l) counts samples (events + censored) with
// duration >= l; censored samples enter n but never e. S(l) = exp(-H(l)) is a
// right-continuous step function, 1 before the first grid point.
class SurvivalModel {
 public:
  static SurvivalModel fit(std::span<const LifetimeSample> samples);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<int>& events() const { return events_; }
  const std::vector<int>& censors() const { return censors_; }
  const std::vector<int>& at_risk() const { return at_risk_; }
  const std::vector<double>& hazard() const { return hazard_; }
  const std::vector<double>& cum_hazard() const { return cum_hazard_; }
  const std::vector<double>& survival() const { return survival_; }

  double survival_at(double l) const;
  double cum_hazard_at(double l) const;
  double hazard_at(double l) const;
  double max_duration() const { return grid_.empty() ? 0.0 : grid_.back(); }
  std::size_t sample_count() const { return sample_count_; }

  void dump_csv(std::ostream& os) const;

 private:
  // Index of the largest grid point <= l, or -1.
  int floor_index(double l) const;

  std::vector<double> grid_;
  std::vector<int> events_, censors_, at_risk_;
  std::vector<double> hazard_, cum_hazard_, survival_;
  std::size_t sample_count_ = 0;
};

// Restricted-mean remaining lifetime E[L - a | L > a], integrating the step
// survival curve on a regular grid of the given step up to the largest
// observed duration.
double expected_remaining(const SurvivalModel& model, double age, double grid_step);

struct VolatilityState {
  double gamma_star = 1.0;
  std::vector<std::pair<double, double>> window_scan;  // (window_start, gamma)
};

// Compares observed preemptions against hazard-predicted preemptions over
// every window (t0, now] with t0 at an observation timestamp. Window starts
// are limited to the trailing scan horizon and capped in number; gamma_star
// is floored at 1 (the adjustment only ever penalizes).
VolatilityState volatility(const SurvivalModel& model,
                           std::span<const VolatilityObservation> obs, double now,
                           double scan_horizon_hours = 48.0, int max_windows = 256);

// expected_remaining computed with the scaled curve exp(-gamma * H(l)).
double expected_remaining_scaled(const SurvivalModel& model, double gamma, double age,
                                 double grid_step);

double predict_lifetime(const SurvivalModel& model, const VolatilityState& vol, double age,
                        double grid_step);

}  // namespace skynomad
