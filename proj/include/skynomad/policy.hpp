#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skynomad/market.hpp"
#include "skynomad/observer.hpp"
#include "skynomad/survival.hpp"
#include "skynomad/valuation.hpp"

namespace skynomad {

enum class ActionKind { stay, launch, terminate_instance };
enum class Reason {
  probe_only,  // no state change this step
  safety_net,
  utility_improvement,
  preemption_recovery,
  thrifty_stop,
};

const char* to_string(ActionKind a);
const char* to_string(Reason r);

struct Decision {
  ActionKind action = ActionKind::stay;
  RegionId region = -1;
  Mode mode = Mode::idle;
  Reason reason = Reason::probe_only;
  double value_of_progress = std::numeric_limits<double>::quiet_NaN();
  double chosen_utility = std::numeric_limits<double>::quiet_NaN();
  double runner_up_utility = std::numeric_limits<double>::quiet_NaN();
};

struct SimOptions {
  double step_hours = 0;  // 0 = use the trace sample interval
  double start_offset_hours = 0;
  double probe_billing_minutes = 1.0;  // successful probes bill this much runtime
  int ckpt_interval_steps = 1;         // work since the last checkpoint is lost on preemption
  int pooled_min_samples = 5;          // below this a region uses the pooled model
  double default_lifetime_hours = 4.0; // prior when no lifetime data exists yet
  double volatility_scan_hours = 48.0;
  int volatility_max_windows = 256;

  bool operator==(const SimOptions&) const = default;
};

// Everything a policy may see and do during one scheduling step. Launch
// attempts and probes run through the engine so that costs, observations and
// state changes stay consistent; a spot launch may fail.
struct StepContext {
  double now = 0;         // job-relative hours
  double trace_time = 0;  // now + start offset, for trace/price queries
  double step_hours = 0;
  double hysteresis = 0;
  ProgressSnapshot snap;
  const JobSpec* job = nullptr;
  const PriceBook* book = nullptr;
  const SimOptions* options = nullptr;
  ObserverSet* observer = nullptr;

  Mode mode = Mode::idle;
  RegionId region = 0;
  std::optional<RegionId> checkpoint_home;  // unset until the first launch
  double cold_start_remaining = 0;
  bool preempted_since_last = false;

  std::function<int(RegionId)> probe;
  std::function<bool(RegionId, Mode)> try_launch;
  std::function<void()> go_idle;
  std::function<double(RegionId)> lifetime_oracle;  // empty unless enabled

  std::optional<RegionId> running_region() const {
    if (mode == Mode::idle) return std::nullopt;
    return region;
  }
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void reset() {}
  virtual bool wants_lifetime_oracle() const { return false; }
  virtual Decision step(StepContext& ctx) = 0;
};

// True iff T - t < P - p + 2d, exactly as stated; a completed job never
// triggers.
bool safety_net_check(const ProgressSnapshot& snap, double cold_start_hours);

// The check evaluated one decision interval ahead with progress frozen.
// Latching on this keeps the on-demand fallback inside the deadline at any
// step size: a boundary-only check could overshoot by step - d.
bool safety_net_due(const ProgressSnapshot& snap, double cold_start_hours,
                    double lookahead_hours);

// Cheapest way to finish on-demand: argmin over candidate regions of
// od_price * (P - p + d) + egress from the checkpoint home. Ties prefer the
// home region, then the lowest index.
RegionId fallback_region_in(const ProgressSnapshot& snap, const PriceBook& book,
                            std::optional<RegionId> checkpoint_home, double ckpt_gb,
                            double cold_start_hours, std::span<const RegionId> candidates);
RegionId fallback_region(const ProgressSnapshot& snap, const PriceBook& book,
                         std::optional<RegionId> checkpoint_home, double ckpt_gb,
                         double cold_start_hours);

// Shared guards used by every deadline-aware policy. Each returns a decision
// when it fires.
std::optional<Decision> thrifty_guard(StepContext& ctx);
std::optional<Decision> deadline_guard(StepContext& ctx, bool& latched,
                                       std::span<const RegionId> fallback_candidates = {});

struct SkyNomadOptions {
  bool use_lifetime_oracle = false;  // read true next-lifetimes from the trace
};

// Utility-driven multi-region policy: probes regions, predicts spot
// lifetimes from survival models conditioned on virtual-instance age,
// prices deadline pressure into a value-of-progress, and migrates to the
// highest-utility state that beats the current one by the hysteresis margin.
class SkyNomadPolicy : public Policy {
 public:
  explicit SkyNomadPolicy(int region_count, SkyNomadOptions opt = {});

  std::string name() const override { return opt_.use_lifetime_oracle ? "skynomad_o" : "skynomad"; }
  void reset() override;
  bool wants_lifetime_oracle() const override { return opt_.use_lifetime_oracle; }
  Decision step(StepContext& ctx) override;

  // Remaining-lifetime prediction for a spot candidate in r: region model
  // when it has enough samples, pooled model otherwise, flat prior when no
  // data exists at all. Volatility-adjusted and conditioned on the region's
  // current age.
  double predict_for(const StepContext& ctx, RegionId r);
  bool safety_latched() const { return latched_; }

 private:
  struct ModelCache {
    std::size_t fitted_count = 0;
    std::optional<SurvivalModel> model;
  };
  const SurvivalModel* model_for(const StepContext& ctx, RegionId r);
  static void refresh(ModelCache& cache, const std::vector<LifetimeSample>& samples);

  int regions_;
  SkyNomadOptions opt_;
  bool latched_ = false;
  std::vector<ModelCache> per_region_;
  ModelCache pooled_;
};

}  // namespace skynomad
