#include "skynomad/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace skynomad {

namespace {

Decision stay_decision(const StepContext& ctx) {
  Decision d;
  d.action = ActionKind::stay;
  d.region = ctx.region;
  d.mode = ctx.mode;
  d.reason = Reason::probe_only;
  return d;
}

Decision launch_decision(RegionId r, Mode m, bool preempted) {
  Decision d;
  d.action = ActionKind::launch;
  d.region = r;
  d.mode = m;
  d.reason = preempted ? Reason::preemption_recovery : Reason::utility_improvement;
  return d;
}

Decision idle_decision(StepContext& ctx) {
  Decision d;
  d.action = ActionKind::terminate_instance;
  d.region = ctx.region;
  d.mode = Mode::idle;
  d.reason = Reason::utility_improvement;
  ctx.go_idle();
  return d;
}

// Pacing inside one region. Spot is taken whenever obtainable; otherwise run
// on-demand when behind the target schedule and pause when ahead.
Decision pace_in_region(StepContext& ctx, RegionId region) {
  if (ctx.mode == Mode::spot && ctx.region == region) return stay_decision(ctx);
  if (ctx.try_launch(region, Mode::spot))
    return launch_decision(region, Mode::spot, ctx.preempted_since_last);
  if (up_behind(ctx.snap)) {
    if (ctx.mode == Mode::od && ctx.region == region) return stay_decision(ctx);
    ctx.try_launch(region, Mode::od);
    return launch_decision(region, Mode::od, ctx.preempted_since_last);
  }
  if (ctx.mode != Mode::idle) return idle_decision(ctx);
  return stay_decision(ctx);
}

std::vector<RegionId> regions_by_spot_price(const StepContext& ctx) {
  std::vector<RegionId> order(static_cast<std::size_t>(ctx.book->region_count()));
  for (RegionId r = 0; r < ctx.book->region_count(); ++r) order[static_cast<std::size_t>(r)] = r;
  std::stable_sort(order.begin(), order.end(), [&](RegionId a, RegionId b) {
    return ctx.book->spot_price(a, ctx.trace_time) < ctx.book->spot_price(b, ctx.trace_time);
  });
  return order;
}

}  // namespace

double up_target(const ProgressSnapshot& snap) {
  return snap.t * snap.total_work / snap.deadline;
}

bool up_behind(const ProgressSnapshot& snap) { return snap.p < up_target(snap) - 1e-12; }

Decision OdOnlyPolicy::step(StepContext& ctx) {
  if (auto d = thrifty_guard(ctx)) return *d;
  if (ctx.mode == Mode::od) return stay_decision(ctx);
  const RegionId r = ctx.book->cheapest_od_region();
  ctx.try_launch(r, Mode::od);
  return launch_decision(r, Mode::od, false);
}

UpPolicy::UpPolicy(RegionId region, std::string display_name, BaselineConfig cfg)
    : region_(region), name_(std::move(display_name)), cfg_(cfg) {}

Decision UpPolicy::step(StepContext& ctx) {
  if (auto d = thrifty_guard(ctx)) return *d;
  if (cfg_.safety_net) {
    // Single-region UP falls back on-demand in its own region.
    const RegionId own[] = {region_};
    if (auto d = deadline_guard(ctx, latched_, own)) return *d;
  }
  return pace_in_region(ctx, region_);
}

Decision UpSwitchPolicy::step(StepContext& ctx) {
  if (auto d = thrifty_guard(ctx)) return *d;
  if (cfg_.safety_net)
    if (auto d = deadline_guard(ctx, latched_)) return *d;

  if (ctx.mode == Mode::spot) return stay_decision(ctx);

  const auto order = regions_by_spot_price(ctx);
  for (RegionId r : order)
    if (ctx.try_launch(r, Mode::spot))
      return launch_decision(r, Mode::spot, ctx.preempted_since_last);

  // Every region failed: UP pacing in the cheapest region on od/idle.
  const RegionId cheapest = order.front();
  if (up_behind(ctx.snap)) {
    if (ctx.mode == Mode::od && ctx.region == cheapest) return stay_decision(ctx);
    ctx.try_launch(cheapest, Mode::od);
    return launch_decision(cheapest, Mode::od, ctx.preempted_since_last);
  }
  if (ctx.mode != Mode::idle) return idle_decision(ctx);
  return stay_decision(ctx);
}

double UpAvailabilityPolicy::score(const StepContext& ctx, RegionId r) const {
  const auto& obs = ctx.observer->view(r).observations();
  if (obs.empty()) return 0.0;
  const std::size_t n = std::min(obs.size(), static_cast<std::size_t>(cfg_.window));
  int ok = 0;
  for (std::size_t i = obs.size() - n; i < obs.size(); ++i) ok += obs[i].o();
  double s = static_cast<double>(ok) / static_cast<double>(n);
  if (price_weighted_) s /= ctx.book->spot_price(r, ctx.trace_time);
  return s;
}

Decision UpAvailabilityPolicy::step(StepContext& ctx) {
  if (auto d = thrifty_guard(ctx)) return *d;
  if (cfg_.safety_net)
    if (auto d = deadline_guard(ctx, latched_)) return *d;

  for (RegionId r : ctx.observer->due_probes(ctx.job->probe_interval_hours, ctx.now,
                                             ctx.running_region()))
    ctx.probe(r);

  // The target moves only when another region's score strictly beats the
  // incumbent's.
  double best = -1;
  RegionId argmax = 0;
  for (RegionId r = 0; r < ctx.book->region_count(); ++r) {
    const double s = score(ctx, r);
    if (s > best + 1e-12) {
      best = s;
      argmax = r;
    }
  }
  if (target_ < 0 || target_ >= ctx.book->region_count() ||
      score(ctx, target_) < best - 1e-12)
    target_ = argmax;

  return pace_in_region(ctx, target_);
}

Decision SpotFailoverPolicy::step(StepContext& ctx) {
  if (auto d = thrifty_guard(ctx)) return *d;
  if (cfg_.safety_net)
    if (auto d = deadline_guard(ctx, latched_)) return *d;

  if (ctx.mode == Mode::spot) return stay_decision(ctx);

  const int R = ctx.book->region_count();
  for (int k = 0; k < R; ++k) {
    const RegionId r = (next_ + k) % R;
    if (ctx.try_launch(r, Mode::spot)) {
      next_ = (r + 1) % R;
      return launch_decision(r, Mode::spot, ctx.preempted_since_last);
    }
  }
  return stay_decision(ctx);  // nothing available; wait
}

}  // namespace skynomad
