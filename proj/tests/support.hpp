#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "skynomad/config.hpp"
#include "skynomad/engine.hpp"
#include "skynomad/oracle.hpp"

namespace testsupport {

using namespace skynomad;

inline Trace make_trace(std::vector<std::vector<uint8_t>> samples,
                        double interval_s = 600.0,
                        std::vector<std::string> labels = {}) {
  if (labels.empty())
    for (std::size_t i = 0; i < samples.size(); ++i) labels.push_back("r" + std::to_string(i));
  return Trace(interval_s, 0.0, std::move(labels), std::move(samples));
}

inline PriceBook make_book(const Trace& trace, std::vector<double> spot,
                           std::vector<double> od, double egress_per_gb = 0.02) {
  PriceBook book;
  book.labels = trace.labels();
  book.interval_s = trace.interval_s();
  for (double p : spot) book.spot.push_back({p});
  book.od = std::move(od);
  const int R = trace.region_count();
  book.egress.assign(R, std::vector<double>(R, egress_per_gb));
  for (int r = 0; r < R; ++r) book.egress[r][r] = 0.0;
  book.validate();
  return book;
}

// ---------------------------------------------------------------------------
// Independent Nelson-Aalen oracle: a literal transcription of the estimator
// formulas, kept separate from the library implementation it cross-checks.
struct NaOracle {
  std::vector<double> grid;
  std::vector<double> hazard, cum_hazard, survival;

  NaOracle(std::vector<std::pair<double, bool>> samples) {  // (duration, censored)
    std::map<double, std::pair<int, int>> by_l;              // l -> (e, c)
    for (auto& [d, cens] : samples) {
      if (cens)
        by_l[d].second++;
      else
        by_l[d].first++;
    }
    double H = 0;
    for (auto& [l, ec] : by_l) {
      int n = 0;
      for (auto& [x, ec2] : by_l)
        if (x >= l) n += ec2.first + ec2.second;
      const double h = double(ec.first) / double(n);
      H += h;
      grid.push_back(l);
      hazard.push_back(h);
      cum_hazard.push_back(H);
      survival.push_back(std::exp(-H));
    }
  }

  double s_at(double l) const {
    double s = 1.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (grid[i] <= l) s = survival[i];
    return s;
  }

  // Restricted mean by direct enumeration of S over the regular grid.
  double remaining(double a, double step) const {
    const double lmax = grid.empty() ? 0 : grid.back();
    if (a >= lmax) return 0;
    double sum = 0;
    for (int k = 1; a + k * step <= lmax + 1e-12; ++k) sum += s_at(a + k * step);
    return step * sum / s_at(a);
  }
};

// ---------------------------------------------------------------------------
// Exhaustive minimum-cost schedule by recursive enumeration over the same
// dynamics as the DP (idle / continue / launch per step, cold start in whole
// steps, egress on checkpoint moves, first placement free). Partial-cost
// pruning against the incumbent keeps it exact.
class BruteForceOracle {
 public:
  BruteForceOracle(const Trace& trace, const PriceBook& book, const JobSpec& job)
      : trace_(trace), book_(book), job_(job) {
    step_ = trace.interval_hours();
    t_steps_ = int(std::floor(job.deadline_hours / step_ + 1e-9));
    p_units_ = int(std::ceil(job.work_hours / step_ - 1e-9));
    d_steps_ = job.cold_start_hours <= 1e-12
                   ? 0
                   : int(std::ceil(job.cold_start_hours / step_ - 1e-9));
  }

  double min_cost() {
    best_ = std::numeric_limits<double>::infinity();
    explore(0, 0, -1, Mode::idle, 0, 0.0);
    return best_;
  }

 private:
  void explore(int t, int p, int loc, Mode mode, int warm, double cost) {
    if (cost >= best_) return;
    if (p >= p_units_) {
      best_ = std::min(best_, cost);
      return;
    }
    if (t >= t_steps_) return;
    if (p + (t_steps_ - t) < p_units_) return;  // cannot finish even running nonstop

    // continue
    if (mode != Mode::idle && (mode == Mode::od || avail(loc, t)))
      explore(t + 1, p + (warm == 0 ? 1 : 0), loc, mode, std::max(0, warm - 1),
              cost + price(loc, mode, t) * step_);
    // launches
    for (int r = 0; r < trace_.region_count(); ++r) {
      const double eg = (loc >= 0 && loc != r)
                            ? book_.egress_per_gb(loc, r) * job_.ckpt_gb
                            : 0.0;
      const int p2 = p + (d_steps_ == 0 ? 1 : 0);
      const int w2 = std::max(0, d_steps_ - 1);
      if (avail(r, t))
        explore(t + 1, p2, r, Mode::spot, w2, cost + eg + price(r, Mode::spot, t) * step_);
      explore(t + 1, p2, r, Mode::od, w2, cost + eg + price(r, Mode::od, t) * step_);
    }
    // idle / terminate
    explore(t + 1, p, loc, Mode::idle, 0, cost);
  }

  bool avail(int r, int t) const { return trace_.samples(r)[std::size_t(t)] != 0; }
  double price(int r, Mode m, int t) const {
    return m == Mode::od ? book_.od_price(r) : book_.spot_price(r, t * step_);
  }

  const Trace& trace_;
  const PriceBook& book_;
  const JobSpec& job_;
  double step_;
  int t_steps_, p_units_, d_steps_;
  double best_ = 0;
};

// Simple random scenario for property suites: step-aligned cold start so the
// oracle and the engine agree exactly.
struct RandomScenario {
  Trace trace;
  PriceBook book;
  JobSpec job;
};

inline RandomScenario random_scenario(uint64_t seed, int regions, int samples,
                                      double step_hours = 1.0 / 6.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0, 1);

  SyntheticTraceSpec spec;
  spec.region_count = regions;
  spec.sample_interval_s = step_hours * 3600.0;
  spec.horizon_hours = samples * step_hours;
  spec.lifetime_tail_exponent = {1.3 + 0.8 * u01(rng)};
  spec.mean_gap_hours = step_hours * (1 + 8 * u01(rng));
  spec.diurnal_amplitude = 0.5 * u01(rng);
  spec.price_spread = 2.0 + 2.0 * u01(rng);
  spec.seed = rng();

  RandomScenario sc;
  sc.trace = generate_trace(spec);
  sc.book = generate_price_book(spec, sc.trace.labels());

  JobSpec job;
  job.cold_start_hours = step_hours * (1 + int(2 * u01(rng)));  // 1..2 whole steps
  const int p_steps = 30 + int(60 * u01(rng));
  job.work_hours = p_steps * step_hours;
  const double min_T = job.work_hours + 2 * job.cold_start_hours + step_hours;
  job.deadline_hours =
      std::min(spec.horizon_hours,
               std::ceil((min_T * (1.1 + 0.8 * u01(rng))) / step_hours) * step_hours);
  job.ckpt_gb = 200.0 * u01(rng);
  job.probe_interval_hours = 2.0;
  sc.job = job;
  return sc;
}

inline double trapz_mean(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return xs.empty() ? 0 : s / double(xs.size());
}

}  // namespace testsupport
