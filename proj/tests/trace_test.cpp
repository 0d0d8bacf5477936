#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

using namespace skynomad;
using testsupport::make_trace;

namespace {
std::string write_tmp(const std::string& name, const std::string& content) {
  const std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}
}  // namespace

TEST_CASE("csv load: two regions, three samples") {
  const auto path = write_tmp("trace_ok.csv",
                              "region,timestamp_s,available\n"
                              "a,0,1\na,600,0\na,1200,1\n"
                              "b,0,1\nb,600,1\nb,1200,0\n");
  const Trace t = load_trace(path, TraceFormat::csv);
  CHECK(t.region_count() == 2);
  CHECK(t.length() == 3);
  CHECK(t.interval_s() == 600.0);
  CHECK(t.label(0) == "a");
  CHECK(t.samples(1) == std::vector<uint8_t>{1, 1, 0});
}

TEST_CASE("csv load: interval jitter is rejected") {
  const auto path = write_tmp("trace_jitter.csv",
                              "region,timestamp_s,available\n"
                              "a,0,1\na,600,0\na,1800,1\n");
  CHECK_THROWS_WITH_AS(load_trace(path, TraceFormat::csv),
                       doctest::Contains("non-uniform interval"), TraceError);
}

TEST_CASE("csv load: malformed rows and region gaps") {
  CHECK_THROWS_AS(load_trace(write_tmp("t1.csv", "region,timestamp_s,available\na,0\n"),
                             TraceFormat::csv),
                  TraceError);
  CHECK_THROWS_AS(load_trace(write_tmp("t2.csv", "region,timestamp_s,available\na,0,2\n"),
                             TraceFormat::csv),
                  TraceError);
  CHECK_THROWS_AS(load_trace(write_tmp("t3.csv", "bad header\n"), TraceFormat::csv), TraceError);
  // One region has fewer samples than another.
  CHECK_THROWS_AS(
      load_trace(write_tmp("t4.csv",
                           "region,timestamp_s,available\na,0,1\na,600,1\nb,0,1\n"),
                 TraceFormat::csv),
      TraceError);
}

TEST_CASE("single all-available region answers 1 everywhere") {
  const Trace t = make_trace({{1, 1, 1, 1}});
  for (double h = 0.0; h < t.horizon_hours() - 1e-9; h += 0.05)
    CHECK(t.availability(0, h) == 1);
}

TEST_CASE("availability is piecewise-constant per sample") {
  const Trace t = make_trace({{1, 0}});  // 10-minute samples
  CHECK(t.availability(0, 5.0 / 60.0) == 1);
  CHECK(t.availability(0, 15.0 / 60.0) == 0);
  CHECK_THROWS_AS(t.availability(0, t.horizon_hours() + 1.0 / 3600.0), TraceError);
  CHECK_THROWS_AS(t.availability(0, t.horizon_hours()), TraceError);
  CHECK_THROWS_AS(t.availability(0, -0.1), TraceError);
}

TEST_CASE("availability agrees with direct sample indexing on grid points") {
  SyntheticTraceSpec spec;
  spec.region_count = 3;
  spec.horizon_hours = 30;
  spec.seed = 5;
  const Trace t = generate_trace(spec);
  for (RegionId r = 0; r < t.region_count(); ++r)
    for (std::size_t i = 0; i < t.length(); ++i)
      CHECK(t.availability(r, (double(i) + 0.5) * t.interval_hours()) == t.samples(r)[i]);
}

TEST_CASE("round trips are bit-exact in both formats") {
  SyntheticTraceSpec spec;
  spec.region_count = 4;
  spec.horizon_hours = 50;
  spec.seed = 123;
  const Trace t = generate_trace(spec);
  const auto csv = (std::filesystem::temp_directory_path() / "rt.csv").string();
  const auto json = (std::filesystem::temp_directory_path() / "rt.json").string();
  save_trace(t, csv, TraceFormat::csv);
  save_trace(t, json, TraceFormat::json);
  CHECK(load_trace(csv, TraceFormat::csv) == t);
  CHECK(load_trace(json, TraceFormat::json) == t);
}

TEST_CASE("generate_trace is a pure function of the spec") {
  SyntheticTraceSpec spec;
  spec.region_count = 5;
  spec.horizon_hours = 100;
  spec.seed = 7;
  CHECK(generate_trace(spec) == generate_trace(spec));
  SyntheticTraceSpec other = spec;
  other.seed = 8;
  CHECK_FALSE(generate_trace(other) == generate_trace(spec));
}

TEST_CASE("generated lifetimes follow the requested heavy tail") {
  SyntheticTraceSpec spec;
  spec.region_count = 1;
  spec.lifetime_tail_exponent = {1.5};
  spec.mean_gap_hours = 1.0 / 6.0;  // short gaps pack many lifetimes in
  spec.horizon_hours = 70000;
  spec.seed = 2024;
  const Trace t = generate_trace(spec);
  const auto runs = region_run_lengths_hours(t, 0);
  CHECK(runs.size() > 100000);
  const double slope = fit_tail_slope(runs);
  CHECK(slope == doctest::Approx(-1.5).epsilon(0.1));
  CHECK(std::abs(slope + 1.5) <= 0.15);
}

TEST_CASE("volatile periods shorten lifetimes") {
  SyntheticTraceSpec spec;
  spec.region_count = 1;
  spec.mean_gap_hours = 1.0 / 6.0;
  spec.horizon_hours = 20000;
  spec.volatile_periods = {{0.0, 10000.0, 10.0}};
  spec.seed = 99;
  const Trace t = generate_trace(spec);

  // Split runs by whether they start inside the volatile half.
  const auto& s = t.samples(0);
  std::vector<double> inside, outside;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!s[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && s[j]) ++j;
    const double start_h = double(i) * t.interval_hours();
    (start_h < 10000.0 ? inside : outside).push_back(double(j - i));
    i = j;
  }
  CHECK(inside.size() > 10000);
  CHECK(outside.size() > 10000);
  CHECK(testsupport::trapz_mean(inside) < testsupport::trapz_mean(outside));
}

TEST_CASE("diurnal amplitude modulates availability over the day") {
  SyntheticTraceSpec spec;
  spec.region_count = 1;
  spec.mean_gap_hours = 2.0;
  spec.diurnal_amplitude = 0.9;
  spec.horizon_hours = 24.0 * 400;
  spec.seed = 31;
  const Trace t = generate_trace(spec);
  const auto& s = t.samples(0);
  double on_first = 0, n_first = 0, on_second = 0, n_second = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double hod = std::fmod(double(i) * t.interval_hours(), 24.0);
    if (hod < 12.0) {
      on_first += s[i];
      ++n_first;
    } else {
      on_second += s[i];
      ++n_second;
    }
  }
  // Longer gaps while sin > 0 (first half of the cycle).
  CHECK(on_second / n_second > on_first / n_first + 0.02);
}

TEST_CASE("gang_aggregate is a pointwise AND") {
  AvailabilitySeries a{600, 0, {1, 1, 0}};
  AvailabilitySeries b{600, 0, {1, 0, 1}};
  CHECK(gang_aggregate({a, b}).samples == std::vector<uint8_t>{1, 0, 0});
  CHECK(gang_aggregate({a}).samples == a.samples);

  std::vector<AvailabilitySeries> ones(16, AvailabilitySeries{600, 0, {1, 1, 1, 1}});
  CHECK(gang_aggregate(ones).samples == std::vector<uint8_t>{1, 1, 1, 1});

  AvailabilitySeries shorter{600, 0, {1, 1}};
  CHECK_THROWS_AS(gang_aggregate({a, shorter}), TraceError);
}

TEST_CASE("gang availability fraction never exceeds any input's") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<AvailabilitySeries> series;
    double min_frac = 1.0;
    for (int k = 0; k < 4; ++k) {
      AvailabilitySeries s{600, 0, {}};
      int on = 0;
      for (int i = 0; i < 50; ++i) {
        s.samples.push_back(rng() % 3 ? 1 : 0);
        on += s.samples.back();
      }
      min_frac = std::min(min_frac, on / 50.0);
      series.push_back(std::move(s));
    }
    const auto agg = gang_aggregate(series);
    int on = 0;
    for (auto v : agg.samples) on += v;
    CHECK(on / 50.0 <= min_frac + 1e-12);
  }
}

TEST_CASE("subset keeps labels and samples aligned") {
  const Trace t = make_trace({{1, 0}, {0, 1}, {1, 1}}, 600, {"a", "b", "c"});
  const Trace s = t.subset({2, 0});
  CHECK(s.region_count() == 2);
  CHECK(s.label(0) == "c");
  CHECK(s.samples(1) == std::vector<uint8_t>{1, 0});
  CHECK(s.region_index("b") == -1);
}
