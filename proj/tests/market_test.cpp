#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

using namespace skynomad;
using testsupport::make_book;
using testsupport::make_trace;

TEST_CASE("migration cost is egress rate times checkpoint size") {
  const Trace t = make_trace({{1}, {1}, {1}}, 600, {"us", "eu", "asia"});
  PriceBook book = make_book(t, {1, 1, 1}, {3, 3, 3}, 0.0);
  book.egress[0][1] = 0.02;  // us -> eu
  book.egress[2][0] = 0.08;  // asia -> us
  CHECK(migration_cost(book, 0, 1, 500.0) == doctest::Approx(10.0));
  CHECK(migration_cost(book, 2, 0, 500.0) == doctest::Approx(40.0));
  CHECK(migration_cost(book, 1, 1, 500.0) == 0.0);
}

TEST_CASE("compute cost integrates the piecewise-constant price") {
  const Trace t = make_trace({{1, 1}}, 3600);
  PriceBook book = make_book(t, {1.81}, {5.0});
  CHECK(compute_cost(book, 0, Mode::spot, 0.0, 2.0) == doctest::Approx(3.62));
  CHECK(compute_cost(book, 0, Mode::idle, 0.0, 100.0) == 0.0);

  PriceBook stepped = book;
  stepped.spot[0] = {1.0, 2.0};  // $1 then $2, hourly samples
  CHECK(compute_cost(stepped, 0, Mode::spot, 0.0, 2.0) == doctest::Approx(3.0));
  CHECK(compute_cost(stepped, 0, Mode::spot, 0.5, 1.5) == doctest::Approx(1.5));
}

TEST_CASE("compute cost is additive over adjacent intervals") {
  const Trace t = make_trace({{1, 1, 1, 1}}, 1800);
  PriceBook book = make_book(t, {2.0}, {6.0});
  book.spot[0] = {1.0, 3.0, 2.0, 5.0};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    double a = u(rng), b = u(rng), c = u(rng);
    std::vector<double> v{a, b, c};
    std::sort(v.begin(), v.end());
    const double whole = compute_cost(book, 0, Mode::spot, v[0], v[2]);
    const double split = compute_cost(book, 0, Mode::spot, v[0], v[1]) +
                         compute_cost(book, 0, Mode::spot, v[1], v[2]);
    CHECK(whole == doctest::Approx(split).epsilon(1e-12));
  }
}

TEST_CASE("proactive migration break-even") {
  CHECK(proactive_migration_breakeven(2.65, 1.81, 4.0, 0.1, 2.0));   // 0.84*3.9 = 3.276 >= 2
  CHECK(proactive_migration_breakeven(2.0, 1.0, 5.0, 0.5, 0.0));     // free migration, cheaper
  CHECK_FALSE(proactive_migration_breakeven(2.0, 2.0, 5.0, 0.5, 0.1));
  CHECK_FALSE(proactive_migration_breakeven(3.0, 1.0, 0.05, 0.1, 0.0));  // t_b <= d
}

TEST_CASE("ledger subtotals match its entries") {
  CostLedger ledger;
  ledger.add(0.0, CostKind::compute, 0, 1.5);
  ledger.add(0.5, CostKind::egress, 1, 2.0);
  ledger.add(1.0, CostKind::probe, 2, 0.03);
  ledger.add(1.5, CostKind::compute, 0, 0.5);
  CHECK(ledger.compute() == doctest::Approx(2.0));
  CHECK(ledger.egress() == doctest::Approx(2.0));
  CHECK(ledger.probes() == doctest::Approx(0.03));
  CHECK(ledger.total() == doctest::Approx(4.03));
  CHECK(ledger.consistent());
  CHECK_THROWS_AS(ledger.add(2.0, CostKind::compute, 0, -1.0), SimError);

  std::ostringstream os;
  ledger.write_csv(os);
  CHECK(os.str().find("t,kind,region,amount") == 0);
  CHECK(os.str().find("egress") != std::string::npos);
}

TEST_CASE("job spec validation") {
  JobSpec job;
  CHECK_NOTHROW(job.validate());
  job.deadline_hours = 99.0;  // < P + d
  CHECK_THROWS_AS(job.validate(), ConfigError);
  job = JobSpec{};
  job.work_hours = -1;
  CHECK_THROWS_AS(job.validate(), ConfigError);
}

TEST_CASE("price book load validates against the trace") {
  const Trace t = make_trace({{1}, {1}}, 600, {"a", "b"});
  const auto path = (std::filesystem::temp_directory_path() / "prices.json").string();
  {
    std::ofstream out(path);
    out << R"({"spot": {"a": 1.0, "b": [2.0]}, "od": {"a": 3.0, "b": 4.0},
               "egress": {"a": 0.05, "b": {"a": 0.1}}})";
  }
  const PriceBook book = load_price_book(path, t);
  CHECK(book.spot_price(0, 0.0) == 1.0);
  CHECK(book.spot_price(1, 5.0) == 2.0);
  CHECK(book.od_price(1) == 4.0);
  CHECK(book.min_od_price() == 3.0);
  CHECK(book.egress_per_gb(0, 1) == 0.05);  // scalar broadcast by source
  CHECK(book.egress_per_gb(0, 0) == 0.0);
  CHECK(book.egress_per_gb(1, 0) == 0.1);

  {
    std::ofstream out(path);
    out << R"({"spot": {"a": 1.0, "zz": 2.0}, "od": {"a": 3.0}})";
  }
  CHECK_THROWS_WITH_AS(load_price_book(path, t), doctest::Contains("unknown region 'zz'"),
                       ConfigError);
  {
    std::ofstream out(path);
    out << R"({"spot": {"a": 1.0, "b": 2.0}, "od": {"a": 3.0}})";
  }
  CHECK_THROWS_WITH_AS(load_price_book(path, t), doctest::Contains("missing region b"),
                       ConfigError);
}

TEST_CASE("price book round trip") {
  SyntheticTraceSpec spec;
  spec.region_count = 3;
  spec.horizon_hours = 10;
  spec.seed = 17;
  const Trace t = generate_trace(spec);
  const PriceBook book = generate_price_book(spec, t.labels());
  const auto path = (std::filesystem::temp_directory_path() / "prices_rt.json").string();
  save_price_book(book, path);
  CHECK(load_price_book(path, t) == book);
}

TEST_CASE("generated price book spans the requested spread") {
  SyntheticTraceSpec spec;
  spec.region_count = 6;
  spec.horizon_hours = 10;
  spec.price_spread = 4.0;
  spec.seed = 3;
  const Trace t = generate_trace(spec);
  const PriceBook book = generate_price_book(spec, t.labels());
  double lo = 1e9, hi = 0;
  for (RegionId r = 0; r < 6; ++r) {
    lo = std::min(lo, book.spot_price(r, 0));
    hi = std::max(hi, book.spot_price(r, 0));
    CHECK(book.od_price(r) > book.spot_price(r, 0));  // spot cheaper than od
  }
  CHECK(hi / lo == doctest::Approx(4.0));
}

TEST_CASE("price book validation catches bad entries") {
  const Trace t = make_trace({{1}, {1}}, 600, {"a", "b"});
  PriceBook book = make_book(t, {1, 2}, {3, 4});
  book.egress[0][0] = 0.1;
  CHECK_THROWS_AS(book.validate(), ConfigError);
  book = make_book(t, {1, 2}, {3, 4});
  book.od[1] = -1;
  CHECK_THROWS_AS(book.validate(), ConfigError);
}
