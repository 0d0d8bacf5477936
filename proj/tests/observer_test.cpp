#include <random>

#include "doctest.h"
#include "support.hpp"

using namespace skynomad;

TEST_CASE("a 1->0 transition closes one lifetime") {
  VirtualInstanceView v;
  v.record({0, ObsSource::probe_ok});
  v.record({2, ObsSource::probe_ok});
  v.record({4, ObsSource::preemption});
  REQUIRE(v.lifetimes().size() == 1);
  CHECK(v.lifetimes()[0].duration == doctest::Approx(4.0));
  CHECK_FALSE(v.lifetimes()[0].censored);
}

TEST_CASE("voluntary termination censors the lifetime") {
  VirtualInstanceView v;
  v.record({0, ObsSource::launch_ok});
  v.record({2, ObsSource::voluntary_terminate});
  REQUIRE(v.lifetimes().size() == 1);
  CHECK(v.lifetimes()[0].duration == doctest::Approx(2.0));
  CHECK(v.lifetimes()[0].censored);
}

TEST_CASE("launch failure closes an open run, uncensored") {
  VirtualInstanceView v;
  v.record({0, ObsSource::launch_ok});
  v.record({1, ObsSource::launch_fail});
  REQUIRE(v.lifetimes().size() == 1);
  CHECK(v.lifetimes()[0].duration == doctest::Approx(1.0));
  CHECK_FALSE(v.lifetimes()[0].censored);
}

TEST_CASE("never-available region yields no lifetimes and anchors age at the last zero") {
  VirtualInstanceView v;
  v.record({0, ObsSource::probe_fail});
  v.record({2, ObsSource::probe_fail});
  CHECK(v.lifetimes().empty());
  CHECK_THROWS_AS(v.age(3.0), ObserverError);  // unavailable: age undefined
  v.record({3, ObsSource::probe_ok});
  CHECK(v.age(4.0) == doctest::Approx(4.0 - 2.0));
}

TEST_CASE("age counts from the most recent failed observation") {
  VirtualInstanceView v;
  v.record({0, ObsSource::probe_fail});
  v.record({2, ObsSource::probe_ok});
  v.record({4, ObsSource::probe_ok});
  v.record({6, ObsSource::probe_ok});
  CHECK(v.age(6.0) == doctest::Approx(6.0));
  // Continuity while no new observation arrives.
  CHECK(v.age(6.5) == doctest::Approx(v.age(6.0) + 0.5));
}

TEST_CASE("age with no failures ever counts from the first observation") {
  VirtualInstanceView v;
  v.record({0, ObsSource::probe_ok});
  v.record({5, ObsSource::probe_ok});
  CHECK(v.age(10.0) == doctest::Approx(10.0));

  VirtualInstanceView fresh;
  fresh.record({7, ObsSource::launch_ok});
  CHECK(fresh.age(7.0) == doctest::Approx(0.0));
}

TEST_CASE("out-of-order observations are rejected") {
  VirtualInstanceView v;
  v.record({5, ObsSource::probe_ok});
  CHECK_THROWS_AS(v.record({4, ObsSource::probe_ok}), ObserverError);
  CHECK_NOTHROW(v.record({5, ObsSource::preemption}));  // equal timestamps allowed
}

TEST_CASE("lifetime count equals 1->0 transitions; censored equals voluntary closures") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 50; ++rep) {
    VirtualInstanceView v;
    int transitions = 0, voluntary_closures = 0;
    int prev = -1;
    double t = 0;
    for (int i = 0; i < 200; ++i) {
      t += 0.5;
      const int pick = int(rng() % 6);
      const auto src = static_cast<ObsSource>(pick);
      const int o = observed_value(src);
      if (prev == 1 && o == 0) {
        ++transitions;
        if (src == ObsSource::voluntary_terminate) ++voluntary_closures;
      }
      v.record({t, src});
      prev = o;
    }
    CHECK(v.lifetimes().size() == std::size_t(transitions));
    int censored = 0;
    for (const auto& l : v.lifetimes()) censored += l.censored ? 1 : 0;
    CHECK(censored == voluntary_closures);
  }
}

TEST_CASE("due probes respect staleness and exempt the running region") {
  ObserverSet obs(3);
  obs.record(0, {0.0, ObsSource::probe_ok});   // will be 2.5h stale
  obs.record(1, {2.0, ObsSource::probe_ok});   // fresh (0.5h)
  // region 2 never observed
  const auto due = obs.due_probes(2.0, 2.5, std::nullopt);
  CHECK(due == std::vector<RegionId>{0, 2});
  // The region hosting the job never probes itself.
  CHECK(obs.due_probes(2.0, 2.5, RegionId{0}) == std::vector<RegionId>{2});
}

TEST_CASE("volatility observations carry ages for o=1 and preemption flags for 1->0") {
  VirtualInstanceView v;
  v.record({0, ObsSource::probe_fail});
  v.record({2, ObsSource::probe_ok});
  v.record({4, ObsSource::probe_ok});
  v.record({6, ObsSource::preemption});
  v.record({8, ObsSource::probe_ok});
  v.record({10, ObsSource::voluntary_terminate});
  const auto vo = v.volatility_observations();
  REQUIRE(vo.size() == 6);
  CHECK_FALSE(vo[0].age);
  CHECK(vo[1].age == doctest::Approx(2.0));   // 2 - 0
  CHECK(vo[2].age == doctest::Approx(4.0));
  CHECK(vo[3].preempted);
  CHECK_FALSE(vo[3].age);
  CHECK(vo[4].age == doctest::Approx(2.0));   // 8 - 6
  CHECK_FALSE(vo[5].preempted);               // voluntary: censored, not a preemption
}

TEST_CASE("pooled lifetimes concatenate every region") {
  ObserverSet obs(2);
  obs.record(0, {0, ObsSource::probe_ok});
  obs.record(0, {1, ObsSource::preemption});
  obs.record(1, {0, ObsSource::probe_ok});
  obs.record(1, {3, ObsSource::preemption});
  CHECK(obs.pooled_lifetimes().size() == 2);
}
