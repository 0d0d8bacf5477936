#include "skynomad/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"

namespace skynomad {

const char* to_string(Mode m) {
  switch (m) {
    case Mode::idle: return "idle";
    case Mode::spot: return "spot";
    case Mode::od: return "od";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "idle") return Mode::idle;
  if (s == "spot") return Mode::spot;
  if (s == "od") return Mode::od;
  throw ConfigError("unknown mode: " + s);
}

void SyntheticTraceSpec::validate() const {
  if (region_count < 1) throw ConfigError("synthetic.region_count: must be >= 1");
  if (horizon_hours <= 0) throw ConfigError("synthetic.horizon_hours: must be > 0");
  if (sample_interval_s <= 0) throw ConfigError("synthetic.sample_interval_s: must be > 0");
  if (lifetime_tail_exponent.empty() ||
      (lifetime_tail_exponent.size() != 1 &&
       lifetime_tail_exponent.size() != static_cast<std::size_t>(region_count)))
    throw ConfigError("synthetic.lifetime_tail_exponent: one value or one per region");
  for (double a : lifetime_tail_exponent)
    if (a <= 1.0) throw ConfigError("synthetic.lifetime_tail_exponent: must be > 1 (finite mean)");
  if (mean_gap_hours < 0) throw ConfigError("synthetic.mean_gap_hours: must be >= 0");
  if (diurnal_amplitude < 0 || diurnal_amplitude > 1)
    throw ConfigError("synthetic.diurnal_amplitude: must be in [0,1]");
  if (price_spread < 1.0) throw ConfigError("synthetic.price_spread: must be >= 1");
  for (const auto& v : volatile_periods)
    if (v.duration_hours < 0 || v.multiplier <= 0)
      throw ConfigError("synthetic.volatile_periods: duration >= 0 and multiplier > 0");
}

double SyntheticTraceSpec::tail_exponent_for(RegionId r) const {
  if (lifetime_tail_exponent.size() == 1) return lifetime_tail_exponent[0];
  return lifetime_tail_exponent.at(static_cast<std::size_t>(r));
}

double SyntheticTraceSpec::hazard_multiplier_at(double t_hours) const {
  double m = 1.0;
  for (const auto& v : volatile_periods)
    if (t_hours >= v.start_hours && t_hours < v.start_hours + v.duration_hours)
      m = std::max(m, v.multiplier);
  return m;
}

Trace::Trace(double interval_s, double start_s, std::vector<std::string> labels,
             std::vector<std::vector<uint8_t>> samples)
    : interval_s_(interval_s), start_s_(start_s), labels_(std::move(labels)),
      samples_(std::move(samples)) {
  if (interval_s_ <= 0) throw TraceError("trace: sample interval must be > 0");
  if (labels_.size() != samples_.size()) throw TraceError("trace: labels/samples size mismatch");
  for (std::size_t r = 1; r < samples_.size(); ++r)
    if (samples_[r].size() != samples_[0].size())
      throw TraceError("trace: regions have different sample counts");
  for (std::size_t r = 0; r < samples_.size(); ++r)
    for (uint8_t v : samples_[r])
      if (v > 1) throw TraceError("trace: availability values must be 0 or 1");
  for (std::size_t i = 0; i < labels_.size(); ++i)
    for (std::size_t j = i + 1; j < labels_.size(); ++j)
      if (labels_[i] == labels_[j]) throw TraceError("trace: duplicate region label " + labels_[i]);
}

void Trace::check_region(RegionId r) const {
  if (r < 0 || r >= region_count())
    throw TraceError("trace: region index out of range: " + std::to_string(r));
}

const std::string& Trace::label(RegionId r) const {
  check_region(r);
  return labels_[static_cast<std::size_t>(r)];
}

RegionId Trace::region_index(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<RegionId>(i);
  return -1;
}

std::size_t Trace::sample_index(double t_hours) const {
  if (t_hours < -kTimeEps || t_hours >= horizon_hours() - kTimeEps)
    throw TraceError("trace: query time outside horizon: t=" + std::to_string(t_hours) + "h");
  auto idx = static_cast<std::size_t>(std::floor((t_hours + kTimeEps) / interval_hours()));
  return std::min(idx, length() - 1);
}

int Trace::availability(RegionId r, double t_hours) const {
  check_region(r);
  return samples_[static_cast<std::size_t>(r)][sample_index(t_hours)];
}

const std::vector<uint8_t>& Trace::samples(RegionId r) const {
  check_region(r);
  return samples_[static_cast<std::size_t>(r)];
}

double Trace::availability_fraction(RegionId r) const {
  check_region(r);
  const auto& s = samples_[static_cast<std::size_t>(r)];
  if (s.empty()) return 0.0;
  double on = 0;
  for (uint8_t v : s) on += v;
  return on / static_cast<double>(s.size());
}

Trace Trace::subset(const std::vector<RegionId>& keep) const {
  std::vector<std::string> labels;
  std::vector<std::vector<uint8_t>> samples;
  for (RegionId r : keep) {
    check_region(r);
    labels.push_back(labels_[static_cast<std::size_t>(r)]);
    samples.push_back(samples_[static_cast<std::size_t>(r)]);
  }
  return Trace(interval_s_, start_s_, std::move(labels), std::move(samples));
}

AvailabilitySeries Trace::series(RegionId r) const {
  check_region(r);
  return AvailabilitySeries{interval_s_, start_s_, samples_[static_cast<std::size_t>(r)]};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

Trace load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw TraceError(path + ": empty trace file");
  if (trim(line) != "region,timestamp_s,available")
    throw TraceError(path + ": expected header 'region,timestamp_s,available'");

  std::vector<std::string> labels;
  std::vector<std::vector<double>> stamps;
  std::vector<std::vector<uint8_t>> samples;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 3)
      throw TraceError(path + ": row " + std::to_string(row) + ": malformed row (want 3 fields)");
    const std::string label = trim(f[0]);
    double ts, av;
    try {
      ts = std::stod(trim(f[1]));
      av = std::stod(trim(f[2]));
    } catch (const std::exception&) {
      throw TraceError(path + ": row " + std::to_string(row) + ": malformed row (non-numeric)");
    }
    if (av != 0.0 && av != 1.0)
      throw TraceError(path + ": row " + std::to_string(row) + ": available must be 0 or 1");
    std::size_t r = 0;
    for (; r < labels.size(); ++r)
      if (labels[r] == label) break;
    if (r == labels.size()) {
      labels.push_back(label);
      stamps.emplace_back();
      samples.emplace_back();
    }
    if (!stamps[r].empty() && ts <= stamps[r].back())
      throw TraceError(path + ": row " + std::to_string(row) +
                       ": timestamps must be strictly increasing per region");
    stamps[r].push_back(ts);
    samples[r].push_back(static_cast<uint8_t>(av));
  }
  if (labels.empty()) throw TraceError(path + ": no data rows");

  // Uniform spacing inside each region, and one shared grid across regions.
  double interval = -1;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (stamps[r].size() >= 2) {
      double d0 = stamps[r][1] - stamps[r][0];
      for (std::size_t i = 2; i < stamps[r].size(); ++i)
        if (std::abs((stamps[r][i] - stamps[r][i - 1]) - d0) > 1e-6)
          throw TraceError(path + ": region " + labels[r] + ": non-uniform interval");
      if (interval < 0)
        interval = d0;
      else if (std::abs(interval - d0) > 1e-6)
        throw TraceError(path + ": region " + labels[r] + ": non-uniform interval across regions");
    }
  }
  if (interval < 0) interval = 600.0;  // single-sample regions: default grid
  for (std::size_t r = 1; r < labels.size(); ++r) {
    if (stamps[r].size() != stamps[0].size())
      throw TraceError(path + ": region " + labels[r] + ": sample count differs from " + labels[0]);
    if (!stamps[r].empty() && std::abs(stamps[r][0] - stamps[0][0]) > 1e-6)
      throw TraceError(path + ": region " + labels[r] + ": start time differs from " + labels[0]);
  }
  return Trace(interval, stamps[0].empty() ? 0.0 : stamps[0][0], std::move(labels),
               std::move(samples));
}

Trace load_trace_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open trace file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw TraceError(path + ": invalid JSON: " + e.what());
  }
  try {
    double interval = j.at("interval_s").get<double>();
    double start = j.value("start_s", 0.0);
    std::vector<std::string> labels;
    std::vector<std::vector<uint8_t>> samples;
    for (const auto& reg : j.at("regions")) {
      labels.push_back(reg.at("label").get<std::string>());
      std::vector<uint8_t> s;
      for (const auto& v : reg.at("samples")) {
        int iv = v.get<int>();
        if (iv != 0 && iv != 1) throw TraceError(path + ": samples must be 0 or 1");
        s.push_back(static_cast<uint8_t>(iv));
      }
      samples.push_back(std::move(s));
    }
    return Trace(interval, start, std::move(labels), std::move(samples));
  } catch (const nlohmann::json::exception& e) {
    throw TraceError(path + ": bad trace JSON: " + e.what());
  }
}

void write_number(std::ostream& os, double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    os << static_cast<long long>(v);
  } else {
    char buf[40];
    snprintf(buf, sizeof buf, "%.9g", v);
    os << buf;
  }
}

}  // namespace

Trace load_trace(const std::string& path, TraceFormat format) {
  return format == TraceFormat::csv ? load_trace_csv(path) : load_trace_json(path);
}

void save_trace(const Trace& trace, const std::string& path, TraceFormat format) {
  std::ofstream out(path);
  if (!out) throw TraceError("cannot write trace file: " + path);
  if (format == TraceFormat::csv) {
    out << "region,timestamp_s,available\n";
    for (RegionId r = 0; r < trace.region_count(); ++r) {
      const auto& s = trace.samples(r);
      for (std::size_t i = 0; i < s.size(); ++i) {
        out << trace.label(r) << ',';
        write_number(out, trace.start_s() + static_cast<double>(i) * trace.interval_s());
        out << ',' << int(s[i]) << '\n';
      }
    }
  } else {
    nlohmann::ordered_json j;
    j["interval_s"] = trace.interval_s();
    j["start_s"] = trace.start_s();
    j["regions"] = nlohmann::ordered_json::array();
    for (RegionId r = 0; r < trace.region_count(); ++r) {
      nlohmann::ordered_json reg;
      reg["label"] = trace.label(r);
      reg["samples"] = trace.samples(r);
      j["regions"].push_back(std::move(reg));
    }
    out << j.dump(2) << '\n';
  }
}

namespace {
uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

Trace generate_trace(const SyntheticTraceSpec& spec) {
  spec.validate();
  const double interval_h = spec.sample_interval_s / 3600.0;
  const auto n = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(spec.horizon_hours / interval_h)));
  const double gap_samples = std::max(1.0, spec.mean_gap_hours / interval_h);

  static const char* kLabels[] = {
      "us-east-1a",        "us-west-2b",      "eu-central-1a", "eu-west-1b",
      "asia-south1-a",     "asia-northeast1-c", "sa-east-1a",  "af-south-1a",
      "us-central1-a",     "europe-west4-b",  "asia-southeast1-b", "me-west1-a",
      "au-southeast1-a"};
  constexpr int kNumLabels = 13;

  std::vector<std::string> labels;
  std::vector<std::vector<uint8_t>> samples;
  for (RegionId r = 0; r < spec.region_count; ++r) {
    if (r < kNumLabels)
      labels.emplace_back(kLabels[r]);
    else
      labels.push_back("region-" + std::to_string(r));

    std::mt19937_64 rng(splitmix64(spec.seed ^ (0xC0FFEEULL + 0x9e3779b97f4a7c15ULL *
                                                                 static_cast<uint64_t>(r + 1))));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double alpha = spec.tail_exponent_for(r);

    std::vector<uint8_t> s(n, 0);
    bool avail = u01(rng) < 0.5;
    long long age = avail ? 1 : 0;  // samples survived in the current run
    for (std::size_t i = 0; i < n; ++i) {
      const double t_h = static_cast<double>(i) * interval_h;
      s[i] = avail ? 1 : 0;
      if (avail) {
        // Per-sample survival so an available run of length k has
        // P(L >= k) = k^(-alpha) when the hazard multiplier is 1.
        const double m = spec.hazard_multiplier_at(t_h);
        const double p_surv =
            std::pow(static_cast<double>(age) / static_cast<double>(age + 1), alpha * m);
        if (u01(rng) >= p_surv) {
          avail = false;
          age = 0;
        } else {
          ++age;
        }
      } else {
        const double diurnal =
            1.0 - spec.diurnal_amplitude *
                      std::sin(2.0 * std::numbers::pi * t_h / 24.0);
        const double q = std::clamp(diurnal / gap_samples, 0.0, 1.0);
        if (u01(rng) < q) {
          avail = true;
          age = 1;
        }
      }
    }
    samples.push_back(std::move(s));
  }
  return Trace(spec.sample_interval_s, 0.0, std::move(labels), std::move(samples));
}

AvailabilitySeries gang_aggregate(const std::vector<AvailabilitySeries>& series) {
  if (series.empty()) throw TraceError("gang_aggregate: no input series");
  const auto& first = series.front();
  AvailabilitySeries out{first.interval_s, first.start_s,
                         std::vector<uint8_t>(first.samples.size(), 1)};
  for (const auto& s : series) {
    if (s.samples.size() != first.samples.size())
      throw TraceError("gang_aggregate: mismatched series lengths");
    if (std::abs(s.interval_s - first.interval_s) > 1e-9)
      throw TraceError("gang_aggregate: mismatched sample intervals");
    for (std::size_t i = 0; i < s.samples.size(); ++i)
      out.samples[i] = static_cast<uint8_t>(out.samples[i] & s.samples[i]);
  }
  return out;
}

std::vector<double> region_run_lengths_hours(const Trace& trace, RegionId r) {
  const auto& s = trace.samples(r);
  std::vector<double> runs;
  std::size_t len = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i]) {
      ++len;
    } else if (len > 0) {
      runs.push_back(static_cast<double>(len) * trace.interval_hours());
      len = 0;
    }
  }
  if (len > 0) runs.push_back(static_cast<double>(len) * trace.interval_hours());
  return runs;
}

double fit_tail_slope(const std::vector<double>& run_lengths) {
  if (run_lengths.size() < 10) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> sorted = run_lengths;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());

  // Empirical CCDF at each distinct length; OLS in log-log space over the
  // range where the CCDF is well populated (>= 20 samples beyond the point).
  std::vector<double> xs, ys;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double ccdf = static_cast<double>(sorted.size() - i) / n;
    if (sorted[i] > 0 && sorted.size() - i >= 20) {
      xs.push_back(std::log(sorted[i]));
      ys.push_back(std::log(ccdf));
    }
    i = j;
  }
  if (xs.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  const double m = static_cast<double>(xs.size());
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) return std::numeric_limits<double>::quiet_NaN();
  return (m * sxy - sx * sy) / denom;
}

}  // namespace skynomad
