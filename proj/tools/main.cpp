#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "skynomad/config.hpp"
#include "skynomad/sweep.hpp"

namespace fs = std::filesystem;
using namespace skynomad;

namespace {

struct PolicySummary {
  std::string policy;
  int jobs = 0;
  double mean_cost = 0, stderr_cost = 0;
  double mean_compute = 0, mean_egress = 0, mean_probe = 0;
  double deadline_rate = 0;
  double selection_accuracy = std::numeric_limits<double>::quiet_NaN();
  double overlap_optimal = std::numeric_limits<double>::quiet_NaN();
};

std::string fmt(double v, int prec = 2) {
  if (std::isnan(v)) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

int env_parallelism() {
  if (const char* p = std::getenv("SKYNOMAD_PARALLEL")) {
    const int n = std::atoi(p);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 4;
}

void apply_env_output(ScenarioConfig& cfg) {
  if (const char* o = std::getenv("SKYNOMAD_OUT")) cfg.output_dir = o;
}

PolicySummary summarize(const std::string& policy, const std::vector<RunReport>& reports) {
  PolicySummary s;
  s.policy = policy;
  s.jobs = static_cast<int>(reports.size());
  std::vector<double> costs;
  double sel_sum = 0, ovl_sum = 0;
  int sel_n = 0, ovl_n = 0, met = 0;
  for (const auto& r : reports) {
    costs.push_back(r.total_cost);
    s.mean_compute += r.compute_cost;
    s.mean_egress += r.egress_cost;
    s.mean_probe += r.probe_cost;
    met += r.deadline_met ? 1 : 0;
    if (!std::isnan(r.selection_accuracy)) {
      sel_sum += r.selection_accuracy;
      ++sel_n;
    }
    if (!std::isnan(r.region_overlap_with_optimal)) {
      ovl_sum += r.region_overlap_with_optimal;
      ++ovl_n;
    }
  }
  const double n = std::max(1, s.jobs);
  for (double c : costs) s.mean_cost += c;
  s.mean_cost /= n;
  s.mean_compute /= n;
  s.mean_egress /= n;
  s.mean_probe /= n;
  if (costs.size() >= 2) {
    double ss = 0;
    for (double c : costs) ss += (c - s.mean_cost) * (c - s.mean_cost);
    s.stderr_cost = std::sqrt(ss / (costs.size() - 1)) / std::sqrt(double(costs.size()));
  }
  s.deadline_rate = s.jobs ? double(met) / s.jobs : 0;
  if (sel_n) s.selection_accuracy = sel_sum / sel_n;
  if (ovl_n) s.overlap_optimal = ovl_sum / ovl_n;
  return s;
}

void write_summary_csv(const std::vector<PolicySummary>& rows, std::ostream& os) {
  os << "policy,jobs,mean_cost,stderr_cost,mean_compute,mean_egress,mean_probe,"
        "deadline_rate,selection_accuracy,overlap_optimal\n";
  for (const auto& s : rows) {
    os << s.policy << ',' << s.jobs << ',' << s.mean_cost << ',' << s.stderr_cost << ','
       << s.mean_compute << ',' << s.mean_egress << ',' << s.mean_probe << ','
       << s.deadline_rate << ',';
    if (!std::isnan(s.selection_accuracy)) os << s.selection_accuracy;
    os << ',';
    if (!std::isnan(s.overlap_optimal)) os << s.overlap_optimal;
    os << '\n';
  }
}

void print_summary_table(const std::vector<PolicySummary>& rows) {
  std::cout << std::left << std::setw(22) << "policy" << std::right << std::setw(6) << "jobs"
            << std::setw(12) << "mean cost" << std::setw(10) << "dl rate" << std::setw(10)
            << "sel acc" << std::setw(12) << "ovl opt" << '\n';
  for (const auto& s : rows) {
    std::cout << std::left << std::setw(22) << s.policy << std::right << std::setw(6) << s.jobs
              << std::setw(12) << fmt(s.mean_cost) << std::setw(10) << fmt(s.deadline_rate)
              << std::setw(10) << fmt(s.selection_accuracy) << std::setw(12)
              << fmt(s.overlap_optimal) << '\n';
  }
}

int cmd_simulate(const std::string& config_path, const std::vector<std::string>& policy_override,
                 std::optional<uint64_t> seed_override, std::optional<std::string> out_override,
                 std::optional<int> jobs_override) {
  ScenarioConfig cfg = ScenarioConfig::from_file(config_path);
  if (!policy_override.empty()) cfg.policies = policy_override;
  if (seed_override) cfg.seed = *seed_override;
  if (out_override) cfg.output_dir = *out_override;
  if (jobs_override) cfg.sweep.job_count = *jobs_override;
  apply_env_output(cfg);
  cfg.validate();

  const Scenario sc = load_scenario(cfg);
  const auto offsets = start_offsets(sc.trace, cfg.job, cfg.options, cfg.sweep.job_count,
                                     cfg.sweep.start_spacing_hours);
  const auto names = expand_policy_names(cfg.policies, sc.trace);

  fs::create_directories(cfg.output_dir);
  std::map<std::string, std::vector<RunReport>> by_policy;
  for (const auto& name : names) {
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      SimOptions opts = cfg.options;
      opts.start_offset_hours = offsets[i];
      by_policy[name].push_back(
          run_named_policy(sc, cfg.job, name, cfg.seed, opts, cfg.baselines));
    }
  }

  // Region overlap against the optimal run with the same start time.
  const bool have_optimal = by_policy.count("optimal") > 0;
  if (have_optimal) {
    const auto& opt_runs = by_policy["optimal"];
    for (auto& [name, runs] : by_policy)
      for (std::size_t i = 0; i < runs.size() && i < opt_runs.size(); ++i)
        runs[i].region_overlap_with_optimal = region_overlap(runs[i], opt_runs[i]);
  }

  bool guarantee_violated = false;
  std::vector<PolicySummary> rows;
  for (const auto& name : names) {
    const auto& runs = by_policy[name];
    rows.push_back(summarize(name, runs));
    for (std::size_t i = 0; i < runs.size(); ++i) {
      std::ostringstream fn;
      fn << cfg.output_dir << "/report_" << name;
      for (auto& ch : fn.str()) (void)ch;
      std::string base = "report_" + name;
      for (auto& ch : base)
        if (ch == '@' || ch == '/') ch = '_';
      std::ofstream out(cfg.output_dir + "/" + base + "_s" + std::to_string(i) + ".json");
      out << runs[i].to_json(true).dump(2) << '\n';
      if (policy_has_deadline_guarantee(name, cfg.baselines) && !runs[i].deadline_met) {
        std::cerr << "DEADLINE MISS by guaranteed policy " << name << " (start offset "
                  << offsets[i] << "h): finish=" << runs[i].finish_time << "\n";
        guarantee_violated = true;
      }
    }
  }
  // Aggregate row over the single-region UP instances when "up" was expanded.
  {
    std::vector<RunReport> all_up;
    for (const auto& [name, runs] : by_policy)
      if (name.rfind("up@", 0) == 0) all_up.insert(all_up.end(), runs.begin(), runs.end());
    if (!all_up.empty()) rows.push_back(summarize("up(mean)", all_up));
  }

  std::ofstream sum(cfg.output_dir + "/summary.csv");
  write_summary_csv(rows, sum);
  print_summary_table(rows);

  if (have_optimal) {
    bool ok = true;
    for (const auto& [name, runs] : by_policy) {
      if (name == "optimal") continue;
      for (std::size_t i = 0; i < runs.size(); ++i) {
        const double opt = by_policy["optimal"][i].total_cost;
        if (runs[i].total_cost < opt - 1e-9) {
          std::cout << "dominance VIOLATION: " << name << " cost " << runs[i].total_cost
                    << " < optimal " << opt << " at start " << offsets[i] << "h\n";
          ok = false;
        }
      }
    }
    std::cout << (ok ? "dominance check: optimal <= every policy on every start  [ok]\n"
                     : "dominance check FAILED\n");
  }

  if (guarantee_violated) {
    std::cerr << "error: a deadline-guaranteed policy missed its deadline\n";
    return 1;
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, std::vector<double> ratios,
              std::vector<int> rcounts, std::vector<double> ckpts, std::optional<int> jobs,
              std::optional<std::string> out_override, int parallel) {
  ScenarioConfig cfg = ScenarioConfig::from_file(config_path);
  if (!ratios.empty()) cfg.sweep.deadline_ratios = std::move(ratios);
  if (!rcounts.empty()) cfg.sweep.region_counts = std::move(rcounts);
  if (!ckpts.empty()) cfg.sweep.ckpt_sizes_gb = std::move(ckpts);
  if (jobs) cfg.sweep.job_count = *jobs;
  if (out_override) cfg.output_dir = *out_override;
  apply_env_output(cfg);
  cfg.validate();

  const SweepResult result = run_sweep(cfg, parallel);
  fs::create_directories(cfg.output_dir);
  std::ofstream out(cfg.output_dir + "/matrix.csv");
  write_matrix_csv(result, out);
  std::ofstream cfg_out(cfg.output_dir + "/sweep_config.json");
  cfg_out << cfg.to_json().dump(2) << '\n';
  std::cout << "wrote " << result.rows.size() << " rows to " << cfg.output_dir
            << "/matrix.csv\n";
  return 0;
}

int cmd_gen_trace(std::optional<std::string> config_path, SyntheticTraceSpec spec,
                  const std::string& out_dir, const std::string& format) {
  if (config_path) {
    ScenarioConfig cfg = ScenarioConfig::from_file(*config_path);
    if (!cfg.trace.synthetic)
      throw ConfigError("gen-trace: config has no trace.synthetic section");
    spec = *cfg.trace.synthetic;
  }
  spec.validate();
  const Trace trace = generate_trace(spec);
  const PriceBook book = generate_price_book(spec, trace.labels());
  fs::create_directories(out_dir);
  const TraceFormat tf = format == "json" ? TraceFormat::json : TraceFormat::csv;
  const std::string trace_path =
      out_dir + "/trace." + (tf == TraceFormat::json ? "json" : "csv");
  save_trace(trace, trace_path, tf);
  save_price_book(book, out_dir + "/prices.json");

  std::vector<double> all_runs;
  std::cout << std::left << std::setw(22) << "region" << std::right << std::setw(10) << "avail"
            << std::setw(14) << "median life" << std::setw(12) << "spot $/h" << '\n';
  for (RegionId r = 0; r < trace.region_count(); ++r) {
    auto runs = region_run_lengths_hours(trace, r);
    all_runs.insert(all_runs.end(), runs.begin(), runs.end());
    double median = 0;
    if (!runs.empty()) {
      std::sort(runs.begin(), runs.end());
      median = runs[runs.size() / 2];
    }
    std::cout << std::left << std::setw(22) << trace.label(r) << std::right << std::setw(10)
              << fmt(trace.availability_fraction(r)) << std::setw(14) << fmt(median)
              << std::setw(12) << fmt(book.spot_price(r, 0)) << '\n';
  }
  const double slope = fit_tail_slope(all_runs);
  std::cout << "lifetimes: " << all_runs.size() << ", tail-fit slope " << fmt(slope, 3)
            << " (target -" << fmt(spec.tail_exponent_for(0), 2) << ")\n";
  std::cout << "wrote " << trace_path << " and " << out_dir << "/prices.json\n";
  return 0;
}

struct TimelineRow {
  double t;
  std::string region, mode, event;
};

int cmd_report(const std::vector<std::string>& dirs, std::optional<std::string> out_override) {
  std::string out_dir = out_override.value_or(dirs.front());
  fs::create_directories(out_dir);

  // Merge summary.csv files keyed by (dir, policy) and copy matrix rows into
  // per-axis figure CSVs.
  std::ofstream merged(out_dir + "/merged_summary.csv");
  merged << "run_dir,policy,jobs,mean_cost,stderr_cost,mean_compute,mean_egress,mean_probe,"
            "deadline_rate,selection_accuracy,overlap_optimal\n";
  bool any_input = false;
  std::vector<std::string> matrix_lines;
  std::string matrix_header;
  for (const auto& dir : dirs) {
    if (fs::exists(dir + "/summary.csv")) {
      std::ifstream in(dir + "/summary.csv");
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line))
        if (!line.empty()) {
          merged << dir << ',' << line << '\n';
          any_input = true;
        }
    }
    if (fs::exists(dir + "/matrix.csv")) {
      std::ifstream in(dir + "/matrix.csv");
      std::string line;
      std::getline(in, matrix_header);
      while (std::getline(in, line))
        if (!line.empty()) {
          matrix_lines.push_back(line);
          any_input = true;
        }
    }
  }

  if (!matrix_lines.empty()) {
    auto axis_csv = [&](const std::string& name, int axis_col) {
      std::ofstream os(out_dir + "/cost_vs_" + name + ".csv");
      os << matrix_header << '\n';
      for (const auto& l : matrix_lines) os << l << '\n';
      (void)axis_col;
    };
    axis_csv("deadline_ratio", 0);
    axis_csv("region_count", 1);
    axis_csv("ckpt_size", 2);
  }

  // Migration timelines from per-run reports: one row per event.
  for (const auto& dir : dirs) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("report_", 0) != 0 || entry.path().extension() != ".json") continue;
      std::ifstream in(entry.path());
      nlohmann::json j;
      try {
        in >> j;
      } catch (...) {
        continue;
      }
      if (!j.contains("events")) continue;
      any_input = true;
      std::vector<TimelineRow> rows;
      // Mode at each event time comes from the step occupancy records.
      std::vector<std::pair<double, std::string>> mode_at;
      if (j.contains("steps"))
        for (const auto& s : j["steps"])
          mode_at.emplace_back(s[0].get<double>(), s[1].get<std::string>());
      auto mode_of = [&](double t) {
        std::string m = "idle";
        for (const auto& [st, sm] : mode_at) {
          if (st > t + 1e-9) break;
          m = sm;
        }
        return m;
      };
      for (const auto& e : j["events"])
        rows.push_back({e["t"].get<double>(), std::to_string(e["region"].get<int>()),
                        mode_of(e["t"].get<double>()), e["kind"].get<std::string>()});
      std::string base = entry.path().stem().string();
      std::ofstream os(out_dir + "/timeline_" + base.substr(7) + ".csv");
      os << "t,region,mode,event\n";
      for (const auto& r : rows)
        os << r.t << ',' << r.region << ',' << r.mode << ',' << r.event << '\n';
    }
  }

  if (!any_input) {
    std::cerr << "error: no summary.csv, matrix.csv or report_*.json found in the given dirs\n";
    return 2;
  }
  std::cout << "report written to " << out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven multi-region spot scheduling simulator"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config;
  std::vector<std::string> sim_policies;
  std::optional<uint64_t> sim_seed;
  std::optional<std::string> sim_out;
  std::optional<int> sim_jobs;
  auto* sim = app.add_subcommand("simulate", "Run policies over one scenario");
  sim->add_option("config", sim_config, "scenario config JSON")->required();
  sim->add_option("--policies", sim_policies, "override policy list")->delimiter(',');
  sim->add_option("--seed", sim_seed, "override seed");
  sim->add_option("--output", sim_out, "override output dir");
  sim->add_option("--jobs", sim_jobs, "override job count (start times)");

  // sweep
  std::string sweep_config;
  std::vector<double> sweep_ratios, sweep_ckpts;
  std::vector<int> sweep_rcounts;
  std::optional<int> sweep_jobs;
  std::optional<std::string> sweep_out;
  int sweep_parallel = env_parallelism();
  auto* sw = app.add_subcommand("sweep", "Parameter sweep producing matrix.csv");
  sw->add_option("config", sweep_config, "scenario config JSON")->required();
  sw->add_option("--deadline-ratios", sweep_ratios)->delimiter(',');
  sw->add_option("--region-counts", sweep_rcounts)->delimiter(',');
  sw->add_option("--ckpt-sizes", sweep_ckpts)->delimiter(',');
  sw->add_option("--jobs", sweep_jobs, "jobs (start times) per cell");
  sw->add_option("--output", sweep_out);
  sw->add_option("--parallel", sweep_parallel, "worker threads");

  // gen-trace
  std::optional<std::string> gen_config;
  SyntheticTraceSpec gen_spec;
  double gen_tail = 1.5;
  std::string gen_out = "trace_out", gen_format = "csv";
  auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic trace + price file");
  gen->add_option("--config", gen_config, "read trace.synthetic from a config file");
  gen->add_option("--regions", gen_spec.region_count);
  gen->add_option("--horizon", gen_spec.horizon_hours, "hours");
  gen->add_option("--tail", gen_tail, "Pareto tail exponent");
  gen->add_option("--mean-gap", gen_spec.mean_gap_hours, "hours");
  gen->add_option("--diurnal", gen_spec.diurnal_amplitude);
  gen->add_option("--price-spread", gen_spec.price_spread);
  gen->add_option("--interval-s", gen_spec.sample_interval_s);
  gen->add_option("--seed", gen_spec.seed);
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--format", gen_format)->check(CLI::IsMember({"csv", "json"}));

  // report
  std::vector<std::string> rep_dirs;
  std::optional<std::string> rep_out;
  auto* rep = app.add_subcommand("report", "Merge run dirs into comparison tables");
  rep->add_option("dirs", rep_dirs, "run directories")->required();
  rep->add_option("--out", rep_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(sim_config, sim_policies, sim_seed, sim_out, sim_jobs);
    if (sw->parsed())
      return cmd_sweep(sweep_config, sweep_ratios, sweep_rcounts, sweep_ckpts, sweep_jobs,
                       sweep_out, sweep_parallel);
    if (gen->parsed()) {
      gen_spec.lifetime_tail_exponent = {gen_tail};
      return cmd_gen_trace(gen_config, gen_spec, gen_out, gen_format);
    }
    if (rep->parsed()) return cmd_report(rep_dirs, rep_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
