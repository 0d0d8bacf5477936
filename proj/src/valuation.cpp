#include "skynomad/valuation.hpp"

#include <algorithm>
#include <cmath>

namespace skynomad {

double value_of_progress(const ProgressSnapshot& snap, double c_od_min) {
  if (snap.p >= snap.total_work)
    throw SimError("value_of_progress: job already complete");
  if (snap.t >= snap.deadline)
    throw DeadlineMissed("value_of_progress: past deadline with work remaining");
  const double nominal = snap.total_work / snap.deadline;
  if (snap.t <= 0) return c_od_min;
  if (snap.p <= 0) return c_od_min * snap.pressure() / nominal;
  return c_od_min * snap.pressure() / snap.average_progress();
}

double utility(const CandidateState& cand, double value_per_hour, double cold_start_hours) {
  switch (cand.mode) {
    case Mode::idle:
      return 0.0;
    case Mode::od:
      return value_per_hour - cand.price;
    case Mode::spot: {
      const double life = cand.predicted_lifetime;
      if (!(life > 0)) return -std::numeric_limits<double>::infinity();
      if (std::isinf(life)) return value_per_hour - cand.price;
      const double eta = std::max(0.0, life - cold_start_hours) / life;
      return value_per_hour * eta - cand.price - cand.migration / life;
    }
  }
  return 0.0;
}

std::vector<RankedCandidate> rank_candidates(const std::vector<CandidateState>& candidates,
                                             double value_per_hour, double cold_start_hours,
                                             const CandidateState& current, double hysteresis) {
  const double u_current = utility(current, value_per_hour, cold_start_hours);
  std::vector<RankedCandidate> ranked;
  for (const auto& c : candidates) {
    const double u = utility(c, value_per_hour, cold_start_hours);
    if (u > u_current + hysteresis) ranked.push_back({c, u});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.utility != b.utility) return a.utility > b.utility;
    if (a.state.price != b.state.price) return a.state.price < b.state.price;
    if (a.state.region != b.state.region) return a.state.region < b.state.region;
    return static_cast<int>(a.state.mode) < static_cast<int>(b.state.mode);
  });
  return ranked;
}

}  // namespace skynomad
