#include "skynomad/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace skynomad {

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key + ": missing required field");
  return *it;
}

SyntheticTraceSpec synthetic_from_json(const nlohmann::json& j) {
  SyntheticTraceSpec s;
  s.region_count = j.value("region_count", s.region_count);
  s.horizon_hours = j.value("horizon_hours", s.horizon_hours);
  if (j.contains("lifetime_tail_exponent")) {
    const auto& e = j["lifetime_tail_exponent"];
    s.lifetime_tail_exponent.clear();
    if (e.is_number()) {
      s.lifetime_tail_exponent.push_back(e.get<double>());
    } else {
      for (const auto& v : e) s.lifetime_tail_exponent.push_back(v.get<double>());
    }
  }
  s.mean_gap_hours = j.value("mean_gap_hours", s.mean_gap_hours);
  s.diurnal_amplitude = j.value("diurnal_amplitude", s.diurnal_amplitude);
  if (j.contains("volatile_periods")) {
    for (const auto& v : j["volatile_periods"])
      s.volatile_periods.push_back({v.at("start_hours").get<double>(),
                                    v.at("duration_hours").get<double>(),
                                    v.at("multiplier").get<double>()});
  }
  s.price_spread = j.value("price_spread", s.price_spread);
  s.seed = j.value("seed", s.seed);
  s.sample_interval_s = j.value("sample_interval_s", s.sample_interval_s);
  return s;
}

nlohmann::ordered_json synthetic_to_json(const SyntheticTraceSpec& s) {
  nlohmann::ordered_json j;
  j["region_count"] = s.region_count;
  j["horizon_hours"] = s.horizon_hours;
  if (s.lifetime_tail_exponent.size() == 1)
    j["lifetime_tail_exponent"] = s.lifetime_tail_exponent[0];
  else
    j["lifetime_tail_exponent"] = s.lifetime_tail_exponent;
  j["mean_gap_hours"] = s.mean_gap_hours;
  j["diurnal_amplitude"] = s.diurnal_amplitude;
  auto vp = nlohmann::ordered_json::array();
  for (const auto& v : s.volatile_periods)
    vp.push_back({{"start_hours", v.start_hours},
                  {"duration_hours", v.duration_hours},
                  {"multiplier", v.multiplier}});
  j["volatile_periods"] = std::move(vp);
  j["price_spread"] = s.price_spread;
  j["seed"] = s.seed;
  j["sample_interval_s"] = s.sample_interval_s;
  return j;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  ScenarioConfig cfg;
  try {
    const auto& tr = field(j, "trace", "config");
    if (tr.contains("synthetic")) {
      cfg.trace.synthetic = synthetic_from_json(tr["synthetic"]);
    } else {
      cfg.trace.path = field(tr, "path", "config.trace").get<std::string>();
      const std::string fmt = tr.value("format", std::string("csv"));
      if (fmt == "csv")
        cfg.trace.format = TraceFormat::csv;
      else if (fmt == "json")
        cfg.trace.format = TraceFormat::json;
      else
        throw ConfigError("config.trace.format: must be 'csv' or 'json'");
    }
    if (j.contains("prices") && !j["prices"].is_null())
      cfg.price_path = j["prices"].get<std::string>();

    if (j.contains("job")) {
      const auto& job = j["job"];
      cfg.job.work_hours = job.value("work_hours", cfg.job.work_hours);
      cfg.job.deadline_hours = job.value("deadline_hours", cfg.job.deadline_hours);
      cfg.job.cold_start_hours = job.value("cold_start_hours", cfg.job.cold_start_hours);
      cfg.job.ckpt_gb = job.value("ckpt_gb", cfg.job.ckpt_gb);
      cfg.job.probe_interval_hours =
          job.value("probe_interval_hours", cfg.job.probe_interval_hours);
      if (job.contains("hysteresis") && !job["hysteresis"].is_null())
        cfg.job.hysteresis = job["hysteresis"].get<double>();
    }
    if (j.contains("policies")) {
      cfg.policies.clear();
      for (const auto& p : j["policies"]) cfg.policies.push_back(p.get<std::string>());
    }
    if (j.contains("region_filter"))
      for (const auto& r : j["region_filter"]) cfg.region_filter.push_back(r.get<std::string>());
    if (j.contains("baselines")) {
      cfg.baselines.window = j["baselines"].value("window", cfg.baselines.window);
      cfg.baselines.safety_net = j["baselines"].value("safety_net", cfg.baselines.safety_net);
    }
    if (j.contains("sweep")) {
      const auto& sw = j["sweep"];
      if (sw.contains("deadline_ratios"))
        for (const auto& v : sw["deadline_ratios"]) cfg.sweep.deadline_ratios.push_back(v.get<double>());
      if (sw.contains("region_counts"))
        for (const auto& v : sw["region_counts"]) cfg.sweep.region_counts.push_back(v.get<int>());
      if (sw.contains("ckpt_sizes_gb"))
        for (const auto& v : sw["ckpt_sizes_gb"]) cfg.sweep.ckpt_sizes_gb.push_back(v.get<double>());
      cfg.sweep.job_count = sw.value("job_count", cfg.sweep.job_count);
      if (sw.contains("start_spacing_hours") && !sw["start_spacing_hours"].is_null())
        cfg.sweep.start_spacing_hours = sw["start_spacing_hours"].get<double>();
    }
    if (j.contains("options")) {
      const auto& o = j["options"];
      cfg.options.step_hours = o.value("step_hours", cfg.options.step_hours);
      cfg.options.start_offset_hours =
          o.value("start_offset_hours", cfg.options.start_offset_hours);
      cfg.options.probe_billing_minutes =
          o.value("probe_billing_minutes", cfg.options.probe_billing_minutes);
      cfg.options.ckpt_interval_steps =
          o.value("ckpt_interval_steps", cfg.options.ckpt_interval_steps);
      cfg.options.pooled_min_samples =
          o.value("pooled_min_samples", cfg.options.pooled_min_samples);
      cfg.options.default_lifetime_hours =
          o.value("default_lifetime_hours", cfg.options.default_lifetime_hours);
      cfg.options.volatility_scan_hours =
          o.value("volatility_scan_hours", cfg.options.volatility_scan_hours);
      cfg.options.volatility_max_windows =
          o.value("volatility_max_windows", cfg.options.volatility_max_windows);
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  return from_json(j);
}

nlohmann::ordered_json ScenarioConfig::to_json() const {
  nlohmann::ordered_json j;
  if (trace.synthetic) {
    j["trace"]["synthetic"] = synthetic_to_json(*trace.synthetic);
  } else {
    j["trace"]["path"] = trace.path;
    j["trace"]["format"] = trace.format == TraceFormat::csv ? "csv" : "json";
  }
  j["prices"] = price_path ? nlohmann::ordered_json(*price_path) : nlohmann::ordered_json(nullptr);
  j["job"] = {{"work_hours", job.work_hours},
              {"deadline_hours", job.deadline_hours},
              {"cold_start_hours", job.cold_start_hours},
              {"ckpt_gb", job.ckpt_gb},
              {"probe_interval_hours", job.probe_interval_hours},
              {"hysteresis", job.hysteresis ? nlohmann::ordered_json(*job.hysteresis)
                                            : nlohmann::ordered_json(nullptr)}};
  j["policies"] = policies;
  j["region_filter"] = region_filter;
  j["baselines"] = {{"window", baselines.window}, {"safety_net", baselines.safety_net}};
  j["sweep"] = {{"deadline_ratios", sweep.deadline_ratios},
                {"region_counts", sweep.region_counts},
                {"ckpt_sizes_gb", sweep.ckpt_sizes_gb},
                {"job_count", sweep.job_count},
                {"start_spacing_hours",
                 sweep.start_spacing_hours ? nlohmann::ordered_json(*sweep.start_spacing_hours)
                                           : nlohmann::ordered_json(nullptr)}};
  j["options"] = {{"step_hours", options.step_hours},
                  {"start_offset_hours", options.start_offset_hours},
                  {"probe_billing_minutes", options.probe_billing_minutes},
                  {"ckpt_interval_steps", options.ckpt_interval_steps},
                  {"pooled_min_samples", options.pooled_min_samples},
                  {"default_lifetime_hours", options.default_lifetime_hours},
                  {"volatility_scan_hours", options.volatility_scan_hours},
                  {"volatility_max_windows", options.volatility_max_windows}};
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  return j;
}

void ScenarioConfig::validate() const {
  if (!trace.synthetic && trace.path.empty())
    throw ConfigError("config.trace: needs either a path or a synthetic spec");
  if (trace.synthetic) trace.synthetic->validate();
  if (!trace.synthetic && !price_path)
    throw ConfigError("config.prices: required when the trace comes from a file");
  job.validate();
  if (policies.empty()) throw ConfigError("config.policies: at least one policy required");
  if (sweep.job_count < 1) throw ConfigError("config.sweep.job_count: must be >= 1");
  for (double r : sweep.deadline_ratios)
    if (r <= 0) throw ConfigError("config.sweep.deadline_ratios: must be > 0");
  for (int rc : sweep.region_counts)
    if (rc < 1) throw ConfigError("config.sweep.region_counts: must be >= 1");
  for (double c : sweep.ckpt_sizes_gb)
    if (c < 0) throw ConfigError("config.sweep.ckpt_sizes_gb: must be >= 0");
  if (baselines.window < 1) throw ConfigError("config.baselines.window: must be >= 1");
}

Scenario load_scenario(const ScenarioConfig& cfg) {
  Scenario sc;
  if (cfg.trace.synthetic) {
    sc.trace = generate_trace(*cfg.trace.synthetic);
    if (cfg.price_path)
      sc.book = load_price_book(*cfg.price_path, sc.trace);
    else
      sc.book = generate_price_book(*cfg.trace.synthetic, sc.trace.labels());
  } else {
    sc.trace = load_trace(cfg.trace.path, cfg.trace.format);
    sc.book = load_price_book(*cfg.price_path, sc.trace);
  }
  if (!cfg.region_filter.empty()) {
    std::vector<RegionId> keep;
    for (const auto& label : cfg.region_filter) {
      const RegionId r = sc.trace.region_index(label);
      if (r < 0) throw ConfigError("config.region_filter: unknown region '" + label + "'");
      keep.push_back(r);
    }
    sc.trace = sc.trace.subset(keep);
    sc.book = sc.book.subset(keep);
  }
  return sc;
}

std::vector<std::string> expand_policy_names(const std::vector<std::string>& names,
                                             const Trace& trace) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (n == "up") {
      for (RegionId r = 0; r < trace.region_count(); ++r)
        out.push_back("up@" + trace.label(r));
    } else {
      out.push_back(n);
    }
  }
  return out;
}

bool policy_is_optimal(const std::string& name) { return name == "optimal"; }

bool policy_has_deadline_guarantee(const std::string& name, const BaselineConfig& cfg) {
  if (name == "spot_failover") return cfg.safety_net;
  return true;  // everything else latches the safety net (or is the oracle)
}

std::unique_ptr<Policy> make_policy(const std::string& name, const Trace& trace,
                                    const BaselineConfig& cfg) {
  const int R = trace.region_count();
  if (name == "skynomad") return std::make_unique<SkyNomadPolicy>(R);
  if (name == "skynomad_o")
    return std::make_unique<SkyNomadPolicy>(R, SkyNomadOptions{true});
  if (name == "od_only") return std::make_unique<OdOnlyPolicy>();
  if (name == "up_s") return std::make_unique<UpSwitchPolicy>(cfg);
  if (name == "up_a") return std::make_unique<UpAvailabilityPolicy>(false, cfg);
  if (name == "up_ap") return std::make_unique<UpAvailabilityPolicy>(true, cfg);
  if (name == "spot_failover") return std::make_unique<SpotFailoverPolicy>(cfg);
  if (name.rfind("up@", 0) == 0) {
    const std::string label = name.substr(3);
    const RegionId r = trace.region_index(label);
    if (r < 0) throw ConfigError("policy " + name + ": unknown region '" + label + "'");
    return std::make_unique<UpPolicy>(r, name, cfg);
  }
  throw ConfigError("unknown policy: " + name);
}

std::vector<double> start_offsets(const Trace& trace, const JobSpec& job,
                                  const SimOptions& options, int job_count,
                                  std::optional<double> spacing_hours) {
  const double step = options.step_hours > 0 ? options.step_hours : trace.interval_hours();
  const double max_start = trace.horizon_hours() - job.deadline_hours;
  if (max_start < -kTimeEps)
    throw InfeasibleJob("start_offsets: trace horizon shorter than the deadline");
  if (job_count <= 1) return {0.0};
  const double cap = std::floor((max_start + kTimeEps) / step) * step;
  double spacing;
  if (spacing_hours) {
    spacing = std::max(0.0, std::round(*spacing_hours / step) * step);
  } else {
    spacing = std::floor(max_start / (job_count - 1) / step) * step;
  }
  std::vector<double> offsets;
  for (int i = 0; i < job_count; ++i)
    offsets.push_back(std::min(std::round(i * spacing / step) * step, cap));
  return offsets;
}

RunReport run_named_policy(const Scenario& sc, const JobSpec& job, const std::string& name,
                           uint64_t seed, const SimOptions& options,
                           const BaselineConfig& bcfg) {
  if (policy_is_optimal(name)) {
    const DPSolution sol = solve_optimal(sc.trace, sc.book, job, options);
    if (!sol.feasible)
      throw InfeasibleJob("optimal: no feasible schedule for this job on this trace");
    ScriptedPolicy replay("optimal", sol.schedule);
    return run(sc.trace, sc.book, job, replay, seed, options);
  }
  auto policy = make_policy(name, sc.trace, bcfg);
  return run(sc.trace, sc.book, job, *policy, seed, options);
}

}  // namespace skynomad
