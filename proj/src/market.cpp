#include "skynomad/market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>

#include "json.hpp"

namespace skynomad {

double PriceBook::spot_price(RegionId r, double t_hours) const {
  const auto& s = spot.at(static_cast<std::size_t>(r));
  if (s.size() == 1) return s[0];
  const double interval_h = interval_s / 3600.0;
  auto idx = static_cast<long long>(std::floor((t_hours + kTimeEps) / interval_h));
  idx = std::clamp<long long>(idx, 0, static_cast<long long>(s.size()) - 1);
  return s[static_cast<std::size_t>(idx)];
}

double PriceBook::od_price(RegionId r) const { return od.at(static_cast<std::size_t>(r)); }

double PriceBook::min_od_price() const {
  return od.at(static_cast<std::size_t>(cheapest_od_region()));
}

RegionId PriceBook::cheapest_od_region() const {
  if (od.empty()) throw ConfigError("price book: no on-demand prices");
  RegionId best = 0;
  for (RegionId r = 1; r < region_count(); ++r)
    if (od[static_cast<std::size_t>(r)] < od[static_cast<std::size_t>(best)]) best = r;
  return best;
}

double PriceBook::egress_per_gb(RegionId src, RegionId dst) const {
  return egress.at(static_cast<std::size_t>(src)).at(static_cast<std::size_t>(dst));
}

PriceBook PriceBook::subset(const std::vector<RegionId>& keep) const {
  PriceBook out;
  out.interval_s = interval_s;
  out.start_s = start_s;
  for (RegionId r : keep) {
    out.labels.push_back(labels.at(static_cast<std::size_t>(r)));
    out.spot.push_back(spot.at(static_cast<std::size_t>(r)));
    out.od.push_back(od.at(static_cast<std::size_t>(r)));
  }
  for (RegionId src : keep) {
    std::vector<double> row;
    for (RegionId dst : keep) row.push_back(egress_per_gb(src, dst));
    out.egress.push_back(std::move(row));
  }
  return out;
}

void PriceBook::validate() const {
  const auto n = labels.size();
  if (spot.size() != n || od.size() != n || egress.size() != n)
    throw ConfigError("price book: per-region tables must match the label list");
  for (std::size_t r = 0; r < n; ++r) {
    if (spot[r].empty()) throw ConfigError("price book: empty spot series for " + labels[r]);
    for (double p : spot[r])
      if (p < 0) throw ConfigError("price book: negative spot price for " + labels[r]);
    if (od[r] < 0) throw ConfigError("price book: negative od price for " + labels[r]);
    if (egress[r].size() != n)
      throw ConfigError("price book: egress row size mismatch for " + labels[r]);
    for (std::size_t c = 0; c < n; ++c)
      if (egress[r][c] < 0)
        throw ConfigError("price book: negative egress for " + labels[r]);
    if (egress[r][r] != 0.0)
      throw ConfigError("price book: egress diagonal must be zero for " + labels[r]);
  }
}

PriceBook load_price_book(const std::string& path, const Trace& trace) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open price file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }

  const int R = trace.region_count();
  PriceBook book;
  book.labels = trace.labels();
  book.interval_s = trace.interval_s();
  book.start_s = trace.start_s();
  book.spot.assign(static_cast<std::size_t>(R), {});
  book.od.assign(static_cast<std::size_t>(R), -1.0);
  book.egress.assign(static_cast<std::size_t>(R), std::vector<double>(R, 0.0));

  auto region_of = [&](const std::string& label, const char* section) {
    RegionId r = trace.region_index(label);
    if (r < 0)
      throw ConfigError(path + ": " + section + ": unknown region '" + label +
                        "' (not present in trace)");
    return r;
  };

  for (const auto& [label, val] : j.at("spot").items()) {
    RegionId r = region_of(label, "spot");
    auto& series = book.spot[static_cast<std::size_t>(r)];
    if (val.is_number()) {
      series = {val.get<double>()};
    } else {
      for (const auto& v : val) series.push_back(v.get<double>());
    }
  }
  for (const auto& [label, val] : j.at("od").items())
    book.od[static_cast<std::size_t>(region_of(label, "od"))] = val.get<double>();

  for (RegionId r = 0; r < R; ++r) {
    if (book.spot[static_cast<std::size_t>(r)].empty())
      throw ConfigError(path + ": spot: missing region " + trace.label(r));
    if (book.od[static_cast<std::size_t>(r)] < 0)
      throw ConfigError(path + ": od: missing region " + trace.label(r));
  }

  // Egress accepts a full src->dst map or a source-keyed scalar broadcast
  // across destinations; absent means free migration.
  if (j.contains("egress")) {
    for (const auto& [src_label, val] : j.at("egress").items()) {
      RegionId src = region_of(src_label, "egress");
      auto& row = book.egress[static_cast<std::size_t>(src)];
      if (val.is_number()) {
        for (RegionId dst = 0; dst < R; ++dst)
          row[static_cast<std::size_t>(dst)] = dst == src ? 0.0 : val.get<double>();
      } else {
        for (const auto& [dst_label, p] : val.items()) {
          RegionId dst = region_of(dst_label, "egress");
          row[static_cast<std::size_t>(dst)] = dst == src ? 0.0 : p.get<double>();
        }
      }
    }
  }
  book.validate();
  return book;
}

void save_price_book(const PriceBook& book, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write price file: " + path);
  nlohmann::ordered_json j;
  for (std::size_t r = 0; r < book.labels.size(); ++r) {
    if (book.spot[r].size() == 1)
      j["spot"][book.labels[r]] = book.spot[r][0];
    else
      j["spot"][book.labels[r]] = book.spot[r];
  }
  for (std::size_t r = 0; r < book.labels.size(); ++r) j["od"][book.labels[r]] = book.od[r];
  for (std::size_t r = 0; r < book.labels.size(); ++r) {
    nlohmann::ordered_json row;
    for (std::size_t c = 0; c < book.labels.size(); ++c)
      row[book.labels[c]] = book.egress[r][c];
    j["egress"][book.labels[r]] = std::move(row);
  }
  out << j.dump(2) << '\n';
}

namespace {
uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

PriceBook generate_price_book(const SyntheticTraceSpec& spec,
                              const std::vector<std::string>& labels) {
  spec.validate();
  const int R = static_cast<int>(labels.size());
  std::mt19937_64 rng(mix64(spec.seed ^ 0x5077C0575ULL));
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  // Spot prices span exactly [base, base*spread] on a log grid, assigned to
  // regions in a seeded shuffle. On-demand is a fixed multiple of spot.
  const double base = 1.8;
  std::vector<int> order(static_cast<std::size_t>(R));
  for (int i = 0; i < R; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);

  PriceBook book;
  book.labels = labels;
  book.interval_s = spec.sample_interval_s;
  book.od.assign(static_cast<std::size_t>(R), 0.0);
  book.spot.assign(static_cast<std::size_t>(R), {});
  for (int i = 0; i < R; ++i) {
    const double frac = R == 1 ? 0.0 : static_cast<double>(i) / (R - 1);
    const double price = base * std::pow(spec.price_spread, frac);
    const auto r = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
    book.spot[r] = {price};
    book.od[r] = 3.0 * price;
  }
  book.egress.assign(static_cast<std::size_t>(R), std::vector<double>(R, 0.0));
  for (int src = 0; src < R; ++src) {
    const double per_gb = 0.02 + 0.12 * u01(rng);
    for (int dst = 0; dst < R; ++dst)
      if (dst != src)
        book.egress[static_cast<std::size_t>(src)][static_cast<std::size_t>(dst)] = per_gb;
  }
  book.validate();
  return book;
}

void JobSpec::validate() const {
  if (work_hours <= 0) throw ConfigError("job.work_hours: must be > 0");
  if (cold_start_hours < 0) throw ConfigError("job.cold_start_hours: must be >= 0");
  if (ckpt_gb < 0) throw ConfigError("job.ckpt_gb: must be >= 0");
  if (probe_interval_hours <= 0) throw ConfigError("job.probe_interval_hours: must be > 0");
  if (hysteresis && *hysteresis < 0) throw ConfigError("job.hysteresis: must be >= 0");
  if (deadline_hours < work_hours + cold_start_hours)
    throw ConfigError("job.deadline_hours: infeasible even on-demand (T < P + d)");
}

const char* to_string(CostKind k) {
  switch (k) {
    case CostKind::compute: return "compute";
    case CostKind::egress: return "egress";
    case CostKind::probe: return "probe";
  }
  return "?";
}

void CostLedger::add(double t, CostKind kind, RegionId region, double amount) {
  if (amount < 0) throw SimError("ledger: negative amount");
  if (amount == 0) return;
  entries_.push_back({t, kind, region, amount});
  switch (kind) {
    case CostKind::compute: compute_ += amount; break;
    case CostKind::egress: egress_ += amount; break;
    case CostKind::probe: probes_ += amount; break;
  }
}

bool CostLedger::consistent(double eps) const {
  double c = 0, e = 0, p = 0;
  for (const auto& en : entries_) {
    switch (en.kind) {
      case CostKind::compute: c += en.amount; break;
      case CostKind::egress: e += en.amount; break;
      case CostKind::probe: p += en.amount; break;
    }
  }
  return std::abs(c - compute_) <= eps && std::abs(e - egress_) <= eps &&
         std::abs(p - probes_) <= eps;
}

void CostLedger::write_csv(std::ostream& os) const {
  os << "t,kind,region,amount\n";
  for (const auto& e : entries_)
    os << e.t << ',' << to_string(e.kind) << ',' << e.region << ',' << e.amount << '\n';
}

double migration_cost(const PriceBook& book, RegionId src, RegionId dst, double ckpt_gb) {
  if (src == dst) return 0.0;
  return book.egress_per_gb(src, dst) * ckpt_gb;
}

double compute_cost(const PriceBook& book, RegionId r, Mode mode, double t0, double t1) {
  if (t1 < t0) throw SimError("compute_cost: t1 < t0");
  if (mode == Mode::idle) return 0.0;
  if (mode == Mode::od) return book.od_price(r) * (t1 - t0);

  const auto& s = book.spot.at(static_cast<std::size_t>(r));
  if (s.size() == 1) return s[0] * (t1 - t0);
  const double interval_h = book.interval_s / 3600.0;
  double cost = 0.0, t = t0;
  while (t < t1 - kTimeEps) {
    const auto idx = static_cast<long long>(std::floor((t + kTimeEps) / interval_h));
    const double seg_end = std::min(t1, (static_cast<double>(idx) + 1.0) * interval_h);
    cost += book.spot_price(r, t) * (seg_end - t);
    t = seg_end;
  }
  return cost;
}

bool proactive_migration_breakeven(double p_a, double p_b, double t_b, double d,
                                   double migration) {
  if (t_b <= d) return false;  // no effective time in the cheaper region
  return (p_a - p_b) * (t_b - d) >= migration;
}

}  // namespace skynomad
