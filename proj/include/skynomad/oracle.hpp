#pragma once

#include <iosfwd>
#include <vector>

#include "skynomad/market.hpp"
#include "skynomad/policy.hpp"
#include "skynomad/trace.hpp"

namespace skynomad {

struct DPAction {
  enum class Kind { idle, run, launch };
  Kind kind = Kind::idle;
  RegionId region = -1;
  Mode mode = Mode::idle;
};

struct DPSolution {
  bool feasible = false;
  double min_cost = std::numeric_limits<double>::infinity();
  std::vector<DPAction> schedule;  // one action per step until completion
  double step_hours = 0;
  int steps_total = 0;
  int cold_start_steps = 0;
  bool exact_cold_start = true;  // false when d was rounded up to whole steps
};

// Minimum-cost schedule meeting the deadline given full knowledge of the
// trace, by backward induction over (step, progress, checkpoint location,
// run state). Work and cold start are counted in whole steps; the step must
// be a multiple of the trace interval and the start offset must sit on the
// grid. Probes cost nothing here.
DPSolution solve_optimal(const Trace& trace, const PriceBook& book, const JobSpec& job,
                         const SimOptions& options = {});

// Hours until the next 1->0 transition in region r after t (censored at the
// trace horizon). Errors if the region is unavailable at t.
double lifetime_oracle(const Trace& trace, RegionId r, double t_hours);

// Replays a precomputed schedule through the engine.
class ScriptedPolicy : public Policy {
 public:
  ScriptedPolicy(std::string name, std::vector<DPAction> schedule)
      : name_(std::move(name)), schedule_(std::move(schedule)) {}
  std::string name() const override { return name_; }
  void reset() override { next_ = 0; }
  Decision step(StepContext& ctx) override;

 private:
  std::string name_;
  std::vector<DPAction> schedule_;
  std::size_t next_ = 0;
};

void write_schedule_csv(const DPSolution& sol, const Trace& trace, const PriceBook& book,
                        std::ostream& os);

}  // namespace skynomad
