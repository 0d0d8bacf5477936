#include "skynomad/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace skynomad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Run-state encoding: 0 = idle; 1..D+1 = spot with warm counter 0..D;
// D+2..2D+2 = on-demand with warm counter 0..D.
struct StateSpace {
  int R;        // regions
  int locs;     // R + 1; loc == R means "no checkpoint yet"
  int D;        // cold-start steps
  int M;        // run states
  int P_units;  // work steps

  int run_id(Mode m, int warm) const {
    if (m == Mode::idle) return 0;
    return (m == Mode::spot ? 1 : 2 + D) + warm;
  }
  Mode run_mode(int id) const {
    if (id == 0) return Mode::idle;
    return id <= D + 1 ? Mode::spot : Mode::od;
  }
  int run_warm(int id) const { return id <= D + 1 ? id - 1 : id - D - 2; }
  std::size_t index(int p, int loc, int run) const {
    return (static_cast<std::size_t>(p) * static_cast<std::size_t>(locs) +
            static_cast<std::size_t>(loc)) *
               static_cast<std::size_t>(M) +
           static_cast<std::size_t>(run);
  }
  std::size_t size() const {
    return static_cast<std::size_t>(P_units + 1) * static_cast<std::size_t>(locs) *
           static_cast<std::size_t>(M);
  }
};

}  // namespace

DPSolution solve_optimal(const Trace& trace, const PriceBook& book, const JobSpec& job,
                         const SimOptions& options) {
  job.validate();
  book.validate();
  const double interval = trace.interval_hours();
  const double step = options.step_hours > 0 ? options.step_hours : interval;
  const double ratio_f = step / interval;
  const auto ratio = static_cast<long long>(std::llround(ratio_f));
  if (ratio < 1 || std::abs(ratio_f - static_cast<double>(ratio)) > 1e-9)
    throw ConfigError("oracle: step must be a whole multiple of the trace interval");
  const double offset = options.start_offset_hours;
  const auto off_idx = static_cast<long long>(std::llround(offset / interval));
  if (off_idx < 0 || std::abs(offset - static_cast<double>(off_idx) * interval) > 1e-9)
    throw ConfigError("oracle: start offset must sit on the trace grid");
  if (offset + job.deadline_hours > trace.horizon_hours() + kTimeEps)
    throw InfeasibleJob("oracle: trace horizon too short for start offset + deadline");

  const int T_steps = static_cast<int>(std::floor(job.deadline_hours / step + kTimeEps));
  const int P_units = static_cast<int>(std::ceil(job.work_hours / step - kTimeEps));
  const int D = job.cold_start_hours <= kTimeEps
                    ? 0
                    : static_cast<int>(std::ceil(job.cold_start_hours / step - kTimeEps));
  const int R = trace.region_count();

  DPSolution sol;
  sol.step_hours = step;
  sol.steps_total = T_steps;
  sol.cold_start_steps = D;
  sol.exact_cold_start = std::abs(static_cast<double>(D) * step - job.cold_start_hours) <= 1e-9;
  if (P_units + D > T_steps) return sol;  // infeasible even on-demand

  StateSpace ss{R, R + 1, D, 1 + 2 * (D + 1), P_units};
  const std::size_t S = ss.size();
  if (static_cast<double>(S) * T_steps > 3e8)
    throw ConfigError("oracle: instance too large; use a coarser oracle step");

  // avail[r][t], prices per (r, t) on the oracle step grid.
  std::vector<std::vector<uint8_t>> avail(static_cast<std::size_t>(R));
  std::vector<std::vector<double>> spot_p(static_cast<std::size_t>(R));
  for (RegionId r = 0; r < R; ++r) {
    avail[static_cast<std::size_t>(r)].resize(static_cast<std::size_t>(T_steps));
    spot_p[static_cast<std::size_t>(r)].resize(static_cast<std::size_t>(T_steps));
    const auto& s = trace.samples(r);
    for (int t = 0; t < T_steps; ++t) {
      const auto sample = static_cast<std::size_t>(off_idx + ratio * t);
      avail[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)] = s.at(sample);
      spot_p[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)] =
          book.spot_price(r, offset + static_cast<double>(t) * step);
    }
  }
  auto price_of = [&](RegionId r, Mode m, int t) {
    return m == Mode::od ? book.od_price(r)
                         : spot_p[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)];
  };
  auto egress_of = [&](int loc, RegionId r) {
    if (loc == R || loc == r) return 0.0;
    return migration_cost(book, loc, r, job.ckpt_gb);
  };

  std::vector<double> j_next(S), j_cur(S);
  std::vector<uint8_t> act(static_cast<std::size_t>(T_steps) * S, 0);

  // Terminal layer: only completed states are feasible at the deadline.
  for (int p = 0; p <= P_units; ++p)
    for (int loc = 0; loc <= R; ++loc)
      for (int run = 0; run < ss.M; ++run)
        j_next[ss.index(p, loc, run)] = p >= P_units ? 0.0 : kInf;

  // Action encoding: 0 idle/terminate, 1 continue, 2+2r launch spot in r,
  // 3+2r launch od in r.
  for (int t = T_steps - 1; t >= 0; --t) {
    uint8_t* act_t = act.data() + static_cast<std::size_t>(t) * S;
    for (int p = 0; p <= P_units; ++p) {
      for (int loc = 0; loc <= R; ++loc) {
        for (int run = 0; run < ss.M; ++run) {
          const std::size_t idx = ss.index(p, loc, run);
          if (p >= P_units) {  // done: spend nothing more
            j_cur[idx] = 0.0;
            act_t[idx] = 0;
            continue;
          }
          if (loc == R && run != 0) {  // cannot be running with no location
            j_cur[idx] = kInf;
            act_t[idx] = 0;
            continue;
          }
          double best = kInf;
          uint8_t best_act = 0;
          auto consider = [&](double v, uint8_t a) {
            if (v < best) {
              best = v;
              best_act = a;
            }
          };
          // Preference order on ties: continue, launches (spot then od, by
          // region), idle last, so equal-cost plans start work earliest.
          const Mode m = ss.run_mode(run);
          if (m != Mode::idle) {
            const bool can_continue =
                m == Mode::od ||
                avail[static_cast<std::size_t>(loc)][static_cast<std::size_t>(t)];
            if (can_continue) {
              const int warm = ss.run_warm(run);
              const int p2 = std::min(P_units, p + (warm == 0 ? 1 : 0));
              const int w2 = std::max(0, warm - 1);
              consider(price_of(loc, m, t) * step + j_next[ss.index(p2, loc, ss.run_id(m, w2))],
                       1);
            }
          }
          for (RegionId r = 0; r < R; ++r) {
            const int p2 = std::min(P_units, p + (D == 0 ? 1 : 0));
            const int w2 = std::max(0, D - 1);
            if (avail[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)])
              consider(egress_of(loc, r) + price_of(r, Mode::spot, t) * step +
                           j_next[ss.index(p2, r, ss.run_id(Mode::spot, w2))],
                       static_cast<uint8_t>(2 + 2 * r));
            consider(egress_of(loc, r) + price_of(r, Mode::od, t) * step +
                         j_next[ss.index(p2, r, ss.run_id(Mode::od, w2))],
                     static_cast<uint8_t>(3 + 2 * r));
          }
          consider(j_next[ss.index(p, loc, 0)], 0);
          j_cur[idx] = best;
          act_t[idx] = best_act;
        }
      }
    }
    std::swap(j_cur, j_next);
  }

  const double total = j_next[ss.index(0, R, 0)];
  if (!(total < kInf / 2)) return sol;
  sol.feasible = true;
  sol.min_cost = total;

  // Forward extraction.
  int p = 0, loc = R, run = 0;
  double check = 0;
  for (int t = 0; t < T_steps && p < P_units; ++t) {
    const uint8_t a = act[static_cast<std::size_t>(t) * S + ss.index(p, loc, run)];
    DPAction out;
    if (a == 0) {
      out.kind = DPAction::Kind::idle;
      run = 0;
    } else if (a == 1) {
      const Mode m = ss.run_mode(run);
      const int warm = ss.run_warm(run);
      out = {DPAction::Kind::run, loc, m};
      check += price_of(loc, m, t) * step;
      if (warm == 0) ++p;
      run = ss.run_id(m, std::max(0, warm - 1));
    } else {
      const RegionId r = (a - 2) / 2;
      const Mode m = (a % 2 == 0) ? Mode::spot : Mode::od;
      out = {DPAction::Kind::launch, r, m};
      check += egress_of(loc, r) + price_of(r, m, t) * step;
      if (D == 0) ++p;
      loc = r;
      run = ss.run_id(m, std::max(0, D - 1));
    }
    sol.schedule.push_back(out);
  }
  if (std::abs(check - total) > 1e-6)
    throw SimError("oracle: schedule extraction does not reproduce the DP cost");
  return sol;
}

double lifetime_oracle(const Trace& trace, RegionId r, double t_hours) {
  if (!trace.availability(r, t_hours))
    throw TraceError("lifetime_oracle: region unavailable at t");
  const auto& s = trace.samples(r);
  for (std::size_t i = trace.sample_index(t_hours) + 1; i < s.size(); ++i)
    if (!s[i]) return static_cast<double>(i) * trace.interval_hours() - t_hours;
  return trace.horizon_hours() - t_hours;
}

Decision ScriptedPolicy::step(StepContext& ctx) {
  Decision d;
  d.region = ctx.region;
  d.mode = ctx.mode;
  if (next_ >= schedule_.size()) {
    if (ctx.mode != Mode::idle) {
      ctx.go_idle();
      d.action = ActionKind::terminate_instance;
      d.reason = Reason::thrifty_stop;
    }
    return d;
  }
  const DPAction a = schedule_[next_++];
  switch (a.kind) {
    case DPAction::Kind::idle:
      if (ctx.mode != Mode::idle) {
        ctx.go_idle();
        d.action = ActionKind::terminate_instance;
        d.mode = Mode::idle;
      }
      break;
    case DPAction::Kind::run:
      break;  // keep the current instance
    case DPAction::Kind::launch:
      if (!ctx.try_launch(a.region, a.mode))
        throw SimError("scripted replay: launch failed; schedule out of sync with trace");
      d.action = ActionKind::launch;
      d.region = a.region;
      d.mode = a.mode;
      d.reason = Reason::utility_improvement;
      break;
  }
  return d;
}

void write_schedule_csv(const DPSolution& sol, const Trace& trace, const PriceBook& book,
                        std::ostream& os) {
  (void)book;
  os << "step,action,region,mode\n";
  for (std::size_t i = 0; i < sol.schedule.size(); ++i) {
    const auto& a = sol.schedule[i];
    const char* kind = a.kind == DPAction::Kind::idle
                           ? "idle"
                           : (a.kind == DPAction::Kind::run ? "run" : "launch");
    os << i << ',' << kind << ','
       << (a.region >= 0 ? trace.label(a.region) : std::string("-")) << ','
       << (a.kind == DPAction::Kind::idle ? "idle" : to_string(a.mode)) << '\n';
  }
}

}  // namespace skynomad
