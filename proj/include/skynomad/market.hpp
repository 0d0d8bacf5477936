#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "skynomad/trace.hpp"
#include "skynomad/types.hpp"

namespace skynomad {

// Prices for every region: spot series (constant or per-sample on the trace
// grid), constant on-demand prices, and an R x R egress matrix in $/GB with a
// zero diagonal.
struct PriceBook {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> spot;  // per region; size 1 = constant
  std::vector<double> od;
  std::vector<std::vector<double>> egress;
  double interval_s = 600.0;
  double start_s = 0.0;

  int region_count() const { return static_cast<int>(labels.size()); }
  double spot_price(RegionId r, double t_hours) const;
  double od_price(RegionId r) const;
  double min_od_price() const;
  RegionId cheapest_od_region() const;
  double egress_per_gb(RegionId src, RegionId dst) const;
  PriceBook subset(const std::vector<RegionId>& keep) const;
  void validate() const;

  bool operator==(const PriceBook&) const = default;
};

PriceBook load_price_book(const std::string& path, const Trace& trace);
void save_price_book(const PriceBook& book, const std::string& path);
PriceBook generate_price_book(const SyntheticTraceSpec& spec,
                              const std::vector<std::string>& labels);

struct JobSpec {
  double work_hours = 100.0;      // P
  double deadline_hours = 150.0;  // T, from job start
  double cold_start_hours = 0.1;  // d
  double ckpt_gb = 50.0;
  double probe_interval_hours = 2.0;
  // Margin a challenger must beat the current state by; defaults to
  // 5% of the cheapest on-demand price when unset.
  std::optional<double> hysteresis;

  void validate() const;
  bool operator==(const JobSpec&) const = default;
};

enum class CostKind { compute, egress, probe };
const char* to_string(CostKind k);

struct CostEntry {
  double t;
  CostKind kind;
  RegionId region;
  double amount;
};

class CostLedger {
 public:
  void add(double t, CostKind kind, RegionId region, double amount);
  double compute() const { return compute_; }
  double egress() const { return egress_; }
  double probes() const { return probes_; }
  double total() const { return compute_ + egress_ + probes_; }
  const std::vector<CostEntry>& entries() const { return entries_; }
  bool consistent(double eps = 1e-9) const;
  void write_csv(std::ostream& os) const;

 private:
  double compute_ = 0, egress_ = 0, probes_ = 0;
  std::vector<CostEntry> entries_;
};

// egress[src][dst] * ckpt_gb; zero on the diagonal.
double migration_cost(const PriceBook& book, RegionId src, RegionId dst, double ckpt_gb);

// Integral of the piecewise-constant price over [t0, t1]; idle costs nothing.
double compute_cost(const PriceBook& book, RegionId r, Mode mode, double t0, double t1);

// Break-even diagnostic: migrating from price p_a to p_b with expected
// lifetime t_b pays off iff the saving rate over the effective time covers
// the one-time migration cost.
bool proactive_migration_breakeven(double p_a, double p_b, double t_b, double d,
                                   double migration);

}  // namespace skynomad
