#include "doctest.h"
#include "support.hpp"

using namespace skynomad;
using testsupport::make_book;
using testsupport::make_trace;

TEST_CASE("safety net boundary algebra") {
  // P=100, T=150, d=0.1, p=0: triggers exactly for t > 49.8.
  JobSpec job;
  CHECK_FALSE(safety_net_check({49.8, 0, 100, 150}, 0.1));
  CHECK(safety_net_check({49.8 + 1e-9, 0, 100, 150}, 0.1));
  CHECK(safety_net_check({49.8 + 1.0 / 6.0, 0, 100, 150}, 0.1));
}

TEST_CASE("completed jobs never trigger the safety net") {
  CHECK_FALSE(safety_net_check({149.9, 100, 100, 150}, 0.1));
  CHECK_FALSE(safety_net_check({149.99, 100, 100, 150}, 5.0));
}

TEST_CASE("degenerate cold start triggers only at the exact slack boundary") {
  // d = 0: T - t < P - p, boundary at t = T - (P - p).
  CHECK_FALSE(safety_net_check({50.0, 0, 100, 150}, 0.0));
  CHECK(safety_net_check({50.0 + 1e-9, 0, 100, 150}, 0.0));
}

TEST_CASE("lookahead check fires one step before the printed inequality") {
  const double step = 1.0 / 6.0;
  const double boundary = 49.8;  // from the printed check
  CHECK(safety_net_due({boundary - step + 1e-9, 0, 100, 150}, 0.1, step));
  CHECK_FALSE(safety_net_due({boundary - step - 1e-6, 0, 100, 150}, 0.1, step));
}

TEST_CASE("fallback region minimizes remaining od cost plus egress") {
  const Trace t = make_trace({{1}, {1}, {1}}, 600, {"a", "b", "c"});

  SUBCASE("uniform prices keep the checkpoint home") {
    PriceBook book = make_book(t, {1, 1, 1}, {3, 3, 3}, 0.05);
    CHECK(fallback_region({0, 0, 100, 150}, book, RegionId{1}, 50, 0.1) == 1);
    // No checkpoint yet: lowest index among ties.
    CHECK(fallback_region({0, 0, 100, 150}, book, std::nullopt, 50, 0.1) == 0);
  }

  SUBCASE("ten hours remaining cannot justify a $40 move for $1/hr") {
    PriceBook book = make_book(t, {1, 1, 1}, {4, 3, 4}, 0.0);
    book.egress[0][1] = 0.08;  // 500 GB * 0.08 = $40
    // remaining = 10 + 0.1; saving 1/hr * 10.1 = $10.1 < $40.
    ProgressSnapshot snap{0, 90, 100, 150};
    CHECK(fallback_region(snap, book, RegionId{0}, 500, 0.1) == 0);
  }

  SUBCASE("a hundred hours remaining justifies the same move") {
    PriceBook book = make_book(t, {1, 1, 1}, {4, 3, 4}, 0.0);
    book.egress[0][1] = 0.08;
    ProgressSnapshot snap{0, 0, 100, 150};
    CHECK(fallback_region(snap, book, RegionId{0}, 500, 0.1) == 1);
  }
}

namespace {

// Minimal harness for exercising SkyNomadPolicy::predict_for without the
// engine: a context with a book, observer views and inert callbacks.
struct PredictHarness {
  Trace trace = make_trace({{1, 1}, {1, 1}, {1, 1}}, 600, {"a", "b", "c"});
  PriceBook book = make_book(trace, {1.8, 2.0, 2.2}, {5, 5, 5});
  JobSpec job;
  SimOptions options;
  ObserverSet observer{3};
  StepContext ctx;

  PredictHarness() {
    ctx.now = 10.0;
    ctx.trace_time = 10.0;
    ctx.step_hours = 1.0 / 6.0;
    ctx.snap = {10.0, 5.0, 100.0, 150.0};
    ctx.job = &job;
    ctx.book = &book;
    ctx.options = &options;
    ctx.observer = &observer;
    ctx.probe = [](RegionId) { return 0; };
    ctx.try_launch = [](RegionId, Mode) { return false; };
    ctx.go_idle = [] {};
  }

  // One closed lifetime of the given duration ending at end_t, then mark the
  // region available again.
  void add_lifetime(RegionId r, double end_t, double duration) {
    observer.record(r, {end_t - duration, ObsSource::probe_ok});
    observer.record(r, {end_t, ObsSource::preemption});
  }
  void mark_available(RegionId r, double t) { observer.record(r, {t, ObsSource::probe_ok}); }
};

}  // namespace

TEST_CASE("cold regions fall back to the pooled model") {
  PredictHarness h;
  // Region 0 accumulates 6 lifetimes (enough for its own model); region 1
  // only 2; region 2 none.
  double t = 0.5;
  for (int i = 0; i < 6; ++i) {
    h.add_lifetime(0, t, 0.3 + 0.1 * i);
    t += 0.5;
  }
  h.add_lifetime(1, 1.0, 0.4);
  h.add_lifetime(1, 2.0, 0.6);
  h.mark_available(0, 9.0);
  h.observer.record(1, {9.7, ObsSource::probe_fail});
  h.observer.record(1, {9.8, ObsSource::probe_ok});
  h.mark_available(2, 9.5);

  SkyNomadPolicy policy(3);
  const double pred1 = policy.predict_for(h.ctx, 1);

  // Oracle: pooled fit over all nine samples, region 1's own volatility
  // observations, age anchored at its most recent failed probe (t=9.7).
  const auto pooled = SurvivalModel::fit(h.observer.pooled_lifetimes());
  const auto vol = volatility(pooled, h.observer.view(1).volatility_observations(), h.ctx.now,
                              h.options.volatility_scan_hours, h.options.volatility_max_windows);
  const double age = h.observer.view(1).age(h.ctx.now);
  CHECK(age == doctest::Approx(0.3));
  CHECK(pred1 > 0);
  CHECK(pred1 == doctest::Approx(predict_lifetime(pooled, vol, age, h.ctx.step_hours)));
}

TEST_CASE("no data at all falls back to the default prior") {
  PredictHarness h;
  h.mark_available(2, 9.5);
  SkyNomadPolicy policy(3);
  CHECK(policy.predict_for(h.ctx, 2) == h.options.default_lifetime_hours);
}

TEST_CASE("a preemption burst penalizes the prediction below the unadjusted value") {
  PredictHarness h;
  // Region 0: a stable history, then a burst of rapid preemptions.
  for (int i = 0; i < 6; ++i) h.add_lifetime(0, 1.0 + i, 0.8);
  for (int i = 0; i < 5; ++i) h.add_lifetime(0, 7.2 + 0.3 * i, 0.1);
  h.mark_available(0, 8.7);

  const auto& lifetimes = h.observer.view(0).lifetimes();
  REQUIRE(lifetimes.size() == 11);
  const auto model = SurvivalModel::fit(lifetimes);
  const auto vol = volatility(model, h.observer.view(0).volatility_observations(), h.ctx.now,
                              h.options.volatility_scan_hours, h.options.volatility_max_windows);
  CHECK(vol.gamma_star > 1.0);

  SkyNomadPolicy policy(3);
  const double age = h.observer.view(0).age(h.ctx.now);
  const double adjusted = policy.predict_for(h.ctx, 0);
  CHECK(adjusted == doctest::Approx(predict_lifetime(model, vol, age, h.ctx.step_hours)));
  CHECK(adjusted < expected_remaining(model, age, h.ctx.step_hours));
}

TEST_CASE("the lifetime-oracle variant reads the context oracle") {
  PredictHarness h;
  h.mark_available(1, 9.0);
  h.ctx.lifetime_oracle = [](RegionId r) { return r == 1 ? 3.5 : 0.25; };
  SkyNomadPolicy policy(3, SkyNomadOptions{true});
  CHECK(policy.wants_lifetime_oracle());
  CHECK(policy.predict_for(h.ctx, 1) == 3.5);
}

TEST_CASE("ages beyond every recorded duration fall back to the prior") {
  PredictHarness h;
  for (int i = 0; i < 6; ++i) h.add_lifetime(0, 0.6 + 0.5 * i, 0.3);
  h.mark_available(0, 3.2);
  // Age at now=10 is 10 - 3.1 = 6.9, far past l_max = 0.3.
  SkyNomadPolicy policy(3);
  CHECK(policy.predict_for(h.ctx, 0) == h.options.default_lifetime_hours);
}
