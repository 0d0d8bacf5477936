#include "skynomad/report.hpp"

#include <cmath>
#include <ostream>

namespace skynomad {

namespace {
nlohmann::ordered_json nan_safe(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}
}  // namespace

nlohmann::ordered_json RunReport::to_json(bool include_logs) const {
  nlohmann::ordered_json j;
  j["policy"] = policy;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["start_offset_hours"] = start_offset_hours;
  j["total_cost"] = total_cost;
  j["compute_cost"] = compute_cost;
  j["egress_cost"] = egress_cost;
  j["probe_cost"] = probe_cost;
  j["completed"] = completed;
  j["deadline_met"] = deadline_met;
  j["finish_time"] = finish_time;
  j["migrations"] = migrations;
  j["mode_time"] = {{"spot", mode_time.spot},
                    {"od", mode_time.od},
                    {"idle", mode_time.idle},
                    {"cold_start", mode_time.cold_start}};
  j["selection_accuracy"] = nan_safe(selection_accuracy);
  j["region_overlap_with_optimal"] = nan_safe(region_overlap_with_optimal);
  if (include_logs) {
    auto steps_j = nlohmann::ordered_json::array();
    for (const auto& s : steps)
      steps_j.push_back({s.t, to_string(s.mode), s.region});
    j["steps"] = std::move(steps_j);
    auto events_j = nlohmann::ordered_json::array();
    for (const auto& e : events)
      events_j.push_back(
          {{"t", e.t}, {"kind", e.kind}, {"region", e.region}, {"amount", e.amount}});
    j["events"] = std::move(events_j);
    auto dec_j = nlohmann::ordered_json::array();
    for (const auto& d : decisions) {
      dec_j.push_back({{"t", d.t},
                       {"action", to_string(d.decision.action)},
                       {"reason", to_string(d.decision.reason)},
                       {"region", d.decision.region},
                       {"mode", to_string(d.decision.mode)},
                       {"value_of_progress", nan_safe(d.decision.value_of_progress)},
                       {"chosen_utility", nan_safe(d.decision.chosen_utility)},
                       {"runner_up_utility", nan_safe(d.decision.runner_up_utility)}});
    }
    j["decisions"] = std::move(dec_j);
  }
  return j;
}

std::string RunReport::serialize(bool include_logs) const { return to_json(include_logs).dump(); }

void RunReport::write_events_jsonl(std::ostream& os) const {
  for (const auto& e : events) {
    nlohmann::ordered_json j{
        {"t", e.t}, {"kind", e.kind}, {"region", e.region}, {"amount", e.amount}};
    os << j.dump() << '\n';
  }
}

void RunReport::write_decisions_jsonl(std::ostream& os) const {
  for (const auto& d : decisions) {
    nlohmann::ordered_json j{{"t", d.t},
                             {"action", to_string(d.decision.action)},
                             {"reason", to_string(d.decision.reason)},
                             {"region", d.decision.region},
                             {"mode", to_string(d.decision.mode)},
                             {"value_of_progress", nan_safe(d.decision.value_of_progress)},
                             {"chosen_utility", nan_safe(d.decision.chosen_utility)},
                             {"runner_up_utility", nan_safe(d.decision.runner_up_utility)}};
    os << j.dump() << '\n';
  }
}

double compute_selection_accuracy(const RunReport& report, const Trace& trace,
                                  const PriceBook& book, double start_offset_hours) {
  int num = 0, den = 0;
  for (const auto& s : report.steps) {
    if (s.mode != Mode::spot) continue;
    const double t = s.t + start_offset_hours;
    double min_price = std::numeric_limits<double>::infinity();
    for (RegionId r = 0; r < trace.region_count(); ++r)
      if (trace.availability(r, t))
        min_price = std::min(min_price, book.spot_price(r, t));
    ++den;
    if (book.spot_price(s.region, t) <= min_price + 1e-12) ++num;
  }
  if (den == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(num) / static_cast<double>(den);
}

double region_overlap(const RunReport& a, const RunReport& b) {
  const std::size_t n = std::min(a.steps.size(), b.steps.size());
  int num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (a.steps[i].mode == Mode::idle || b.steps[i].mode == Mode::idle) continue;
    ++den;
    if (a.steps[i].region == b.steps[i].region) ++num;
  }
  if (den == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace skynomad
