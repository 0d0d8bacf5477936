#include "skynomad/survival.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace skynomad {

SurvivalModel SurvivalModel::fit(std::span<const LifetimeSample> samples) {
  if (samples.empty()) throw SurvivalError("insufficient data: no lifetime samples");

  std::vector<std::pair<double, bool>> sorted;  // (duration, censored)
  sorted.reserve(samples.size());
  for (const auto& s : samples) {
    if (!(s.duration > 0)) throw SurvivalError("lifetime durations must be > 0");
    sorted.emplace_back(s.duration, s.censored);
  }
  std::sort(sorted.begin(), sorted.end());

  SurvivalModel m;
  m.sample_count_ = sorted.size();
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    int e = 0, c = 0;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) {
      if (sorted[j].second)
        ++c;
      else
        ++e;
      ++j;
    }
    m.grid_.push_back(sorted[i].first);
    m.events_.push_back(e);
    m.censors_.push_back(c);
    i = j;
  }

  const auto k = m.grid_.size();
  m.at_risk_.assign(k, 0);
  int n = 0;
  for (std::size_t g = k; g-- > 0;) {
    n += m.events_[g] + m.censors_[g];
    m.at_risk_[g] = n;
  }
  m.hazard_.resize(k);
  m.cum_hazard_.resize(k);
  m.survival_.resize(k);
  double H = 0.0;
  for (std::size_t g = 0; g < k; ++g) {
    m.hazard_[g] = static_cast<double>(m.events_[g]) / static_cast<double>(m.at_risk_[g]);
    H += m.hazard_[g];
    m.cum_hazard_[g] = H;
    m.survival_[g] = std::exp(-H);
  }
  return m;
}

int SurvivalModel::floor_index(double l) const {
  // Largest grid point <= l (right-continuous step lookup).
  auto it = std::upper_bound(grid_.begin(), grid_.end(), l);
  return static_cast<int>(it - grid_.begin()) - 1;
}

double SurvivalModel::survival_at(double l) const {
  const int i = floor_index(l);
  return i < 0 ? 1.0 : survival_[static_cast<std::size_t>(i)];
}

double SurvivalModel::cum_hazard_at(double l) const {
  const int i = floor_index(l);
  return i < 0 ? 0.0 : cum_hazard_[static_cast<std::size_t>(i)];
}

double SurvivalModel::hazard_at(double l) const {
  const int i = floor_index(l);
  return i < 0 ? 0.0 : hazard_[static_cast<std::size_t>(i)];
}

void SurvivalModel::dump_csv(std::ostream& os) const {
  os << "duration,events,censored,at_risk,hazard,cum_hazard,survival\n";
  for (std::size_t g = 0; g < grid_.size(); ++g)
    os << grid_[g] << ',' << events_[g] << ',' << censors_[g] << ',' << at_risk_[g] << ','
       << hazard_[g] << ',' << cum_hazard_[g] << ',' << survival_[g] << '\n';
}

double expected_remaining_scaled(const SurvivalModel& model, double gamma, double age,
                                 double grid_step) {
  if (age < 0) throw SurvivalError("expected_remaining: age must be >= 0");
  if (grid_step <= 0) throw SurvivalError("expected_remaining: grid step must be > 0");
  const double l_max = model.max_duration();
  if (age >= l_max - kTimeEps) return 0.0;  // no observed mass beyond the data

  const double s_age = std::exp(-gamma * model.cum_hazard_at(age));
  if (s_age < 1e-300) return 0.0;
  double sum = 0.0;
  for (long long k = 1;; ++k) {
    const double l = age + static_cast<double>(k) * grid_step;
    if (l > l_max + kTimeEps) break;
    sum += std::exp(-gamma * model.cum_hazard_at(l));
  }
  return grid_step * sum / s_age;
}

double expected_remaining(const SurvivalModel& model, double age, double grid_step) {
  return expected_remaining_scaled(model, 1.0, age, grid_step);
}

VolatilityState volatility(const SurvivalModel& model,
                           std::span<const VolatilityObservation> obs, double now,
                           double scan_horizon_hours, int max_windows) {
  VolatilityState state;
  if (obs.empty()) return state;

  // Suffix sums over observations: preemption counts and hazard-predicted
  // counts (ages are recorded only for o=1 observations).
  const std::size_t n = obs.size();
  std::vector<double> suffix_pred(n + 1, 0.0);
  std::vector<int> suffix_preempt(n + 1, 0);
  for (std::size_t i = n; i-- > 0;) {
    suffix_pred[i] = suffix_pred[i + 1] + (obs[i].age ? model.hazard_at(*obs[i].age) : 0.0);
    suffix_preempt[i] = suffix_preempt[i + 1] + (obs[i].preempted ? 1 : 0);
  }

  constexpr double kDenomEps = 1e-6;
  int windows = 0;
  for (std::size_t i = n; i-- > 0 && windows < max_windows;) {
    const double t0 = obs[i].t;
    if (t0 >= now) continue;
    if (now - t0 > scan_horizon_hours) break;
    // Window (t0, now]: observations strictly after t0.
    std::size_t j = i + 1;
    while (j < n && obs[j].t <= t0 + kTimeEps) ++j;
    const double denom = suffix_pred[j];
    if (denom <= kDenomEps) continue;
    const double gamma = static_cast<double>(suffix_preempt[j]) / denom;
    state.window_scan.emplace_back(t0, gamma);
    state.gamma_star = std::max(state.gamma_star, gamma);
    ++windows;
  }
  return state;
}

double predict_lifetime(const SurvivalModel& model, const VolatilityState& vol, double age,
                        double grid_step) {
  return expected_remaining_scaled(model, vol.gamma_star, age, grid_step);
}

}  // namespace skynomad
