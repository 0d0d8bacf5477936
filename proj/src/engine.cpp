#include "skynomad/engine.hpp"

#include <algorithm>
#include <cmath>

namespace skynomad {

namespace {

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string config_hash(const Trace& trace, const PriceBook& book, const JobSpec& job,
                        const std::string& policy_name, uint64_t seed,
                        const SimOptions& options) {
  nlohmann::ordered_json j;
  j["policy"] = policy_name;
  j["seed"] = seed;
  j["job"] = {{"work_hours", job.work_hours},
              {"deadline_hours", job.deadline_hours},
              {"cold_start_hours", job.cold_start_hours},
              {"ckpt_gb", job.ckpt_gb},
              {"probe_interval_hours", job.probe_interval_hours},
              {"hysteresis", job.hysteresis ? nlohmann::ordered_json(*job.hysteresis)
                                            : nlohmann::ordered_json(nullptr)}};
  j["options"] = {{"step_hours", options.step_hours},
                  {"start_offset_hours", options.start_offset_hours},
                  {"probe_billing_minutes", options.probe_billing_minutes},
                  {"ckpt_interval_steps", options.ckpt_interval_steps},
                  {"pooled_min_samples", options.pooled_min_samples},
                  {"default_lifetime_hours", options.default_lifetime_hours}};
  j["trace"] = {{"interval_s", trace.interval_s()},
                {"start_s", trace.start_s()},
                {"length", trace.length()},
                {"labels", trace.labels()}};
  j["prices"] = {{"od", book.od}, {"spot0", book.spot.empty() ? 0.0 : book.spot[0][0]}};
  return hex64(fnv1a64(j.dump()));
}

RunReport run(const Trace& trace, const PriceBook& book, const JobSpec& job, Policy& policy,
              uint64_t seed, const SimOptions& options) {
  job.validate();
  book.validate();
  if (static_cast<int>(book.labels.size()) != trace.region_count())
    throw ConfigError("engine: price book and trace disagree on region count");
  for (RegionId r = 0; r < trace.region_count(); ++r)
    if (book.labels[static_cast<std::size_t>(r)] != trace.label(r))
      throw ConfigError("engine: price book region order differs from trace at " +
                        trace.label(r));

  const double step = options.step_hours > 0 ? options.step_hours : trace.interval_hours();
  const double offset = options.start_offset_hours;
  const double T = job.deadline_hours;
  const double P = job.work_hours;
  if (offset < 0 || offset + T > trace.horizon_hours() + kTimeEps)
    throw InfeasibleJob("engine: trace horizon too short for start offset + deadline");

  const double hysteresis = job.hysteresis ? *job.hysteresis : 0.05 * book.min_od_price();
  const int R = trace.region_count();

  RunReport report;
  report.policy = policy.name();
  report.seed = seed;
  report.start_offset_hours = offset;
  report.config_hash = config_hash(trace, book, job, policy.name(), seed, options);

  double now = 0, p = 0, cold = 0, last_ckpt_p = 0;
  Mode mode = Mode::idle;
  RegionId region = 0;
  std::optional<RegionId> home;
  bool preempted_flag = false, completed = false;
  long long step_idx = 0;
  ObserverSet observer(R);
  policy.reset();

  auto record_event = [&](const std::string& kind, RegionId r, double amount = 0) {
    report.events.push_back({now, kind, r, amount});
  };

  auto terminate_current = [&]() {
    if (mode == Mode::idle) return;
    if (mode == Mode::spot)
      observer.record(region, {now, ObsSource::voluntary_terminate});
    record_event("terminate", region);
    mode = Mode::idle;
    cold = 0;
  };

  auto probe_fn = [&](RegionId r) -> int {
    const int a = trace.availability(r, now + offset);
    observer.record(r, {now, a ? ObsSource::probe_ok : ObsSource::probe_fail});
    double charge = 0;
    if (a) {
      charge = book.spot_price(r, now + offset) * options.probe_billing_minutes / 60.0;
      report.ledger.add(now, CostKind::probe, r, charge);
    }
    record_event(a ? "probe_ok" : "probe_fail", r, charge);
    return a;
  };

  auto try_launch_fn = [&](RegionId r, Mode m) -> bool {
    if (m == Mode::idle) {
      terminate_current();
      return true;
    }
    if (m == Mode::spot && !trace.availability(r, now + offset)) {
      observer.record(r, {now, ObsSource::launch_fail});
      record_event("launch_fail", r);
      return false;
    }
    terminate_current();
    if (home && *home != r) {
      const double mcost = migration_cost(book, *home, r, job.ckpt_gb);
      report.ledger.add(now, CostKind::egress, r, mcost);
      ++report.migrations;
      record_event("migrate", r, mcost);
    }
    home = r;
    region = r;
    mode = m;
    cold = job.cold_start_hours;
    if (m == Mode::spot) observer.record(r, {now, ObsSource::launch_ok});
    record_event(m == Mode::spot ? "launch_spot" : "launch_od", r);
    return true;
  };

  auto go_idle_fn = [&]() { terminate_current(); };

  std::function<double(RegionId)> oracle_fn;
  if (policy.wants_lifetime_oracle()) {
    oracle_fn = [&](RegionId r) -> double {
      const double t = now + offset;
      if (!trace.availability(r, t)) return 0.0;
      const auto& s = trace.samples(r);
      for (std::size_t i = trace.sample_index(t) + 1; i < s.size(); ++i)
        if (!s[i]) return static_cast<double>(i) * trace.interval_hours() - t;
      return trace.horizon_hours() - t;
    };
  }

  while (true) {
    // Preemptions take effect at the sample boundary where availability
    // flips; work since the last checkpoint is lost (none at the default
    // per-step checkpoint cadence).
    if (mode == Mode::spot && !trace.availability(region, now + offset)) {
      observer.record(region, {now, ObsSource::preemption});
      record_event("preemption", region);
      mode = Mode::idle;
      cold = 0;
      preempted_flag = true;
      p = last_ckpt_p;
    }
    if (p >= P - kTimeEps) {
      completed = true;
      break;
    }
    if (now >= T - kTimeEps) break;

    StepContext ctx;
    ctx.now = now;
    ctx.trace_time = now + offset;
    ctx.step_hours = step;
    ctx.hysteresis = hysteresis;
    ctx.snap = {now, p, P, T};
    ctx.job = &job;
    ctx.book = &book;
    ctx.options = &options;
    ctx.observer = &observer;
    ctx.mode = mode;
    ctx.region = region;
    ctx.checkpoint_home = home;
    ctx.cold_start_remaining = cold;
    ctx.preempted_since_last = preempted_flag;
    ctx.probe = probe_fn;
    ctx.try_launch = try_launch_fn;
    ctx.go_idle = go_idle_fn;
    ctx.lifetime_oracle = oracle_fn;

    const Decision decision = policy.step(ctx);
    report.decisions.push_back({now, decision});
    preempted_flag = false;

    double dt = std::min(step, T - now);
    bool finishing = false;
    if (mode != Mode::idle) {
      const double price = mode == Mode::od ? book.od_price(region)
                                            : book.spot_price(region, now + offset);
      double cold_used = std::min(cold, dt);
      double run_time = dt - cold_used;
      const double need = P - p;
      if (run_time >= need - kTimeEps) {
        run_time = need;
        dt = cold_used + run_time;
        finishing = true;
      }
      report.ledger.add(now, CostKind::compute, region, price * dt);
      cold -= cold_used;
      if (cold < kTimeEps) cold = 0;
      p += run_time;
      report.mode_time.cold_start += cold_used;
      (mode == Mode::spot ? report.mode_time.spot : report.mode_time.od) += run_time;
    } else {
      report.mode_time.idle += dt;
    }
    report.steps.push_back({now, mode, region});
    now += dt;
    ++step_idx;
    if (options.ckpt_interval_steps <= 1 || step_idx % options.ckpt_interval_steps == 0)
      last_ckpt_p = p;
    if (finishing) {
      completed = true;
      break;
    }
    if (now >= T - kTimeEps) break;
  }

  if (completed && mode != Mode::idle) terminate_current();
  report.finish_time = now;
  report.completed = completed;
  report.deadline_met = completed && now <= T + kTimeEps;
  report.compute_cost = report.ledger.compute();
  report.egress_cost = report.ledger.egress();
  report.probe_cost = report.ledger.probes();
  report.total_cost = report.ledger.total();
  record_event(completed ? "complete" : "deadline_reached", region);
  report.selection_accuracy = compute_selection_accuracy(report, trace, book, offset);
  return report;
}

}  // namespace skynomad
