#include "skynomad/policy.hpp"

#include <algorithm>
#include <cmath>

namespace skynomad {

const char* to_string(ActionKind a) {
  switch (a) {
    case ActionKind::stay: return "stay";
    case ActionKind::launch: return "launch";
    case ActionKind::terminate_instance: return "terminate";
  }
  return "?";
}

const char* to_string(Reason r) {
  switch (r) {
    case Reason::probe_only: return "probe_only";
    case Reason::safety_net: return "safety_net";
    case Reason::utility_improvement: return "utility_improvement";
    case Reason::preemption_recovery: return "preemption_recovery";
    case Reason::thrifty_stop: return "thrifty_stop";
  }
  return "?";
}

bool safety_net_check(const ProgressSnapshot& snap, double cold_start_hours) {
  if (snap.p >= snap.total_work - kTimeEps) return false;
  return snap.deadline - snap.t < snap.total_work - snap.p + 2.0 * cold_start_hours;
}

bool safety_net_due(const ProgressSnapshot& snap, double cold_start_hours,
                    double lookahead_hours) {
  ProgressSnapshot ahead = snap;
  ahead.t = snap.t + lookahead_hours;
  return safety_net_check(ahead, cold_start_hours);
}

RegionId fallback_region_in(const ProgressSnapshot& snap, const PriceBook& book,
                            std::optional<RegionId> checkpoint_home, double ckpt_gb,
                            double cold_start_hours, std::span<const RegionId> candidates) {
  std::vector<RegionId> all;
  if (candidates.empty()) {
    all.resize(static_cast<std::size_t>(book.region_count()));
    for (RegionId r = 0; r < book.region_count(); ++r) all[static_cast<std::size_t>(r)] = r;
    candidates = all;
  }
  const double remaining = std::max(0.0, snap.total_work - snap.p) + cold_start_hours;
  auto cost_of = [&](RegionId r) {
    double c = book.od_price(r) * remaining;
    if (checkpoint_home && *checkpoint_home != r)
      c += migration_cost(book, *checkpoint_home, r, ckpt_gb);
    return c;
  };
  double best = std::numeric_limits<double>::infinity();
  for (RegionId r : candidates) best = std::min(best, cost_of(r));
  // Among ties prefer the checkpoint home, then the lowest index.
  if (checkpoint_home &&
      std::find(candidates.begin(), candidates.end(), *checkpoint_home) != candidates.end() &&
      cost_of(*checkpoint_home) <= best + 1e-9)
    return *checkpoint_home;
  for (RegionId r : candidates)
    if (cost_of(r) <= best + 1e-9) return r;
  return candidates.front();
}

RegionId fallback_region(const ProgressSnapshot& snap, const PriceBook& book,
                         std::optional<RegionId> checkpoint_home, double ckpt_gb,
                         double cold_start_hours) {
  return fallback_region_in(snap, book, checkpoint_home, ckpt_gb, cold_start_hours, {});
}

std::optional<Decision> thrifty_guard(StepContext& ctx) {
  if (ctx.snap.p < ctx.job->work_hours - kTimeEps) return std::nullopt;
  Decision d;
  d.reason = Reason::thrifty_stop;
  d.region = ctx.region;
  if (ctx.mode != Mode::idle) {
    ctx.go_idle();
    d.action = ActionKind::terminate_instance;
  }
  return d;
}

std::optional<Decision> deadline_guard(StepContext& ctx, bool& latched,
                                       std::span<const RegionId> fallback_candidates) {
  if (!latched &&
      !safety_net_due(ctx.snap, ctx.job->cold_start_hours, ctx.step_hours))
    return std::nullopt;
  latched = true;
  Decision d;
  d.reason = Reason::safety_net;
  d.mode = Mode::od;
  if (ctx.mode != Mode::od) {
    const RegionId r =
        fallback_region_in(ctx.snap, *ctx.book, ctx.checkpoint_home, ctx.job->ckpt_gb,
                           ctx.job->cold_start_hours, fallback_candidates);
    ctx.try_launch(r, Mode::od);
    d.action = ActionKind::launch;
    d.region = r;
  } else {
    d.action = ActionKind::stay;
    d.region = ctx.region;
  }
  return d;
}

SkyNomadPolicy::SkyNomadPolicy(int region_count, SkyNomadOptions opt)
    : regions_(region_count), opt_(opt),
      per_region_(static_cast<std::size_t>(region_count)) {}

void SkyNomadPolicy::reset() {
  latched_ = false;
  per_region_.assign(static_cast<std::size_t>(regions_), {});
  pooled_ = {};
}

void SkyNomadPolicy::refresh(ModelCache& cache, const std::vector<LifetimeSample>& samples) {
  if (samples.size() == cache.fitted_count && cache.model) return;
  if (samples.empty()) {
    cache.model.reset();
    cache.fitted_count = 0;
    return;
  }
  cache.model = SurvivalModel::fit(samples);
  cache.fitted_count = samples.size();
}

const SurvivalModel* SkyNomadPolicy::model_for(const StepContext& ctx, RegionId r) {
  const auto& own = ctx.observer->view(r).lifetimes();
  if (own.size() >= static_cast<std::size_t>(ctx.options->pooled_min_samples)) {
    refresh(per_region_[static_cast<std::size_t>(r)], own);
    return &*per_region_[static_cast<std::size_t>(r)].model;
  }
  const auto pooled = ctx.observer->pooled_lifetimes();
  if (pooled.empty()) return nullptr;
  if (pooled.size() != pooled_.fitted_count || !pooled_.model)
    pooled_.model = SurvivalModel::fit(pooled), pooled_.fitted_count = pooled.size();
  return &*pooled_.model;
}

double SkyNomadPolicy::predict_for(const StepContext& ctx, RegionId r) {
  if (opt_.use_lifetime_oracle && ctx.lifetime_oracle) return ctx.lifetime_oracle(r);

  const auto& view = ctx.observer->view(r);
  const double age = view.age(ctx.now);
  const SurvivalModel* model = model_for(ctx, r);
  if (!model) return ctx.options->default_lifetime_hours;

  const auto vol_obs = view.volatility_observations();
  const auto vol = volatility(*model, vol_obs, ctx.now, ctx.options->volatility_scan_hours,
                              ctx.options->volatility_max_windows);
  const double predicted = predict_lifetime(*model, vol, age, ctx.step_hours);
  // Ages beyond every recorded duration carry no estimate (the restricted
  // mean runs out of data); treat the region as uninformative rather than
  // dead, consistent with the heavy-tailed premise.
  if (predicted <= 0.0 && age >= model->max_duration() - kTimeEps)
    return ctx.options->default_lifetime_hours;
  return predicted;
}

Decision SkyNomadPolicy::step(StepContext& ctx) {
  if (auto d = thrifty_guard(ctx)) return *d;
  if (auto d = deadline_guard(ctx, latched_)) return *d;

  for (RegionId r : ctx.observer->due_probes(ctx.job->probe_interval_hours, ctx.now,
                                             ctx.running_region()))
    ctx.probe(r);

  const double v = value_of_progress(ctx.snap, ctx.book->min_od_price());
  const double d_cold = ctx.job->cold_start_hours;

  std::vector<CandidateState> cands;
  cands.reserve(2 * static_cast<std::size_t>(regions_) + 1);
  for (RegionId r = 0; r < regions_; ++r) {
    const double mig = ctx.checkpoint_home
                           ? migration_cost(*ctx.book, *ctx.checkpoint_home, r, ctx.job->ckpt_gb)
                           : 0.0;
    const auto last = ctx.observer->view(r).last_state();
    if (last && *last == 1) {
      // Regions never observed, or observed unavailable, are not launch
      // candidates this step; probing will requalify them.
      const double life = predict_for(ctx, r);
      if (life > 0)
        cands.push_back({r, Mode::spot, ctx.book->spot_price(r, ctx.trace_time), life, mig});
    }
    cands.push_back({r, Mode::od, ctx.book->od_price(r), kUnboundedLifetime, mig});
  }
  cands.push_back({ctx.region, Mode::idle, 0.0, kUnboundedLifetime, 0.0});

  CandidateState current{ctx.region, ctx.mode, 0.0, kUnboundedLifetime, 0.0};
  if (ctx.mode == Mode::spot) {
    current.price = ctx.book->spot_price(ctx.region, ctx.trace_time);
    current.predicted_lifetime = predict_for(ctx, ctx.region);
  } else if (ctx.mode == Mode::od) {
    current.price = ctx.book->od_price(ctx.region);
  }
  const double u_current = utility(current, v, d_cold);

  auto ranked = rank_candidates(cands, v, d_cold, current, ctx.hysteresis);
  const Reason why =
      ctx.preempted_since_last ? Reason::preemption_recovery : Reason::utility_improvement;

  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& rc = ranked[i];
    Decision d;
    d.reason = why;
    d.value_of_progress = v;
    d.chosen_utility = rc.utility;
    d.runner_up_utility = i + 1 < ranked.size() ? ranked[i + 1].utility : u_current;
    if (rc.state.mode == Mode::idle) {
      if (ctx.mode == Mode::idle) continue;
      ctx.go_idle();
      d.action = ActionKind::terminate_instance;
      d.region = ctx.region;
      d.mode = Mode::idle;
      return d;
    }
    if (ctx.try_launch(rc.state.region, rc.state.mode)) {
      d.action = ActionKind::launch;
      d.region = rc.state.region;
      d.mode = rc.state.mode;
      return d;
    }
    // Spot attempt failed; the engine recorded the failure and the region is
    // out of the running until the next step.
  }

  Decision d;
  d.action = ActionKind::stay;
  d.region = ctx.region;
  d.mode = ctx.mode;
  d.reason = Reason::probe_only;
  d.value_of_progress = v;
  d.chosen_utility = u_current;
  return d;
}

}  // namespace skynomad
