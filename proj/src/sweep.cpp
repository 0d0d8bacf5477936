#include "skynomad/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

namespace skynomad {

std::vector<RegionId> regions_by_availability(const Trace& trace) {
  std::vector<RegionId> order(static_cast<std::size_t>(trace.region_count()));
  for (RegionId r = 0; r < trace.region_count(); ++r) order[static_cast<std::size_t>(r)] = r;
  std::stable_sort(order.begin(), order.end(), [&](RegionId a, RegionId b) {
    return trace.availability_fraction(a) > trace.availability_fraction(b);
  });
  return order;
}

double deadline_for_ratio(const JobSpec& job, double ratio) {
  return std::max(ratio * job.work_hours, job.work_hours + job.cold_start_hours);
}

namespace {

double mean_of(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return xs.empty() ? std::numeric_limits<double>::quiet_NaN()
                    : s / static_cast<double>(xs.size());
}

double stderr_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
         std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace

SweepResult run_sweep(const ScenarioConfig& cfg, int parallelism) {
  const Scenario base = load_scenario(cfg);
  const auto order = regions_by_availability(base.trace);

  std::vector<double> ratios = cfg.sweep.deadline_ratios;
  if (ratios.empty()) ratios.push_back(cfg.job.deadline_hours / cfg.job.work_hours);
  std::vector<int> rcounts = cfg.sweep.region_counts;
  if (rcounts.empty()) rcounts.push_back(base.trace.region_count());
  std::vector<double> ckpts = cfg.sweep.ckpt_sizes_gb;
  if (ckpts.empty()) ckpts.push_back(cfg.job.ckpt_gb);

  struct Task {
    SweepCell cell;
  };
  std::vector<Task> tasks;
  for (double ratio : ratios)
    for (int rc : rcounts)
      for (double ck : ckpts)
        tasks.push_back({SweepCell{ratio, std::min(rc, base.trace.region_count()), ck}});

  std::vector<std::vector<SweepRow>> per_task(tasks.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const SweepCell cell = tasks[i].cell;

      std::vector<RegionId> keep(order.begin(),
                                 order.begin() + static_cast<long>(cell.region_count));
      Scenario sc{base.trace.subset(keep), base.book.subset(keep)};
      JobSpec job = cfg.job;
      job.deadline_hours = deadline_for_ratio(cfg.job, cell.deadline_ratio);
      job.ckpt_gb = cell.ckpt_gb;

      std::vector<SweepRow> rows;
      const auto names = expand_policy_names(cfg.policies, sc.trace);
      std::vector<double> offsets;
      bool infeasible = false;
      try {
        offsets = start_offsets(sc.trace, job, cfg.options, cfg.sweep.job_count,
                                cfg.sweep.start_spacing_hours);
      } catch (const InfeasibleJob&) {
        infeasible = true;
      }
      for (const auto& name : names) {
        SweepRow row;
        row.cell = cell;
        row.policy = name;
        if (infeasible) {
          row.infeasible = true;
          rows.push_back(row);
          continue;
        }
        std::vector<double> costs, accs;
        int met = 0, jobs = 0;
        try {
          for (double off : offsets) {
            SimOptions opts = cfg.options;
            opts.start_offset_hours = off;
            const RunReport rep = run_named_policy(sc, job, name, cfg.seed, opts, cfg.baselines);
            costs.push_back(rep.total_cost);
            if (!std::isnan(rep.selection_accuracy)) accs.push_back(rep.selection_accuracy);
            met += rep.deadline_met ? 1 : 0;
            ++jobs;
            if (row.config_hash.empty()) row.config_hash = rep.config_hash;
          }
          row.jobs = jobs;
          row.mean_cost = mean_of(costs);
          row.stderr_cost = stderr_of(costs);
          row.deadline_rate = jobs ? static_cast<double>(met) / jobs
                                   : std::numeric_limits<double>::quiet_NaN();
          row.mean_selection_accuracy = mean_of(accs);
        } catch (const InfeasibleJob&) {
          row.infeasible = true;
        }
        rows.push_back(row);
      }
      per_task[i] = std::move(rows);
    }
  };

  const int workers = std::max(1, parallelism);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  SweepResult result;
  for (auto& rows : per_task)
    for (auto& r : rows) result.rows.push_back(std::move(r));
  return result;
}

void write_matrix_csv(const SweepResult& result, std::ostream& os) {
  os << "deadline_ratio,region_count,ckpt_gb,policy,jobs,mean_cost,stderr_cost,"
        "deadline_rate,selection_accuracy,infeasible,config_hash\n";
  for (const auto& r : result.rows) {
    os << r.cell.deadline_ratio << ',' << r.cell.region_count << ',' << r.cell.ckpt_gb << ','
       << r.policy << ',' << r.jobs << ',';
    if (r.infeasible)
      os << ",,,";
    else {
      os << r.mean_cost << ',' << r.stderr_cost << ',' << r.deadline_rate << ',';
      if (!std::isnan(r.mean_selection_accuracy)) os << r.mean_selection_accuracy;
    }
    os << ',' << (r.infeasible ? 1 : 0) << ',' << r.config_hash << '\n';
  }
}

}  // namespace skynomad
