#include "skynomad/observer.hpp"

#include <ostream>

#include "json.hpp"

namespace skynomad {

const char* to_string(ObsSource s) {
  switch (s) {
    case ObsSource::probe_ok: return "probe_ok";
    case ObsSource::probe_fail: return "probe_fail";
    case ObsSource::launch_ok: return "launch_ok";
    case ObsSource::launch_fail: return "launch_fail";
    case ObsSource::preemption: return "preemption";
    case ObsSource::voluntary_terminate: return "voluntary_terminate";
  }
  return "?";
}

int observed_value(ObsSource s) {
  return (s == ObsSource::probe_ok || s == ObsSource::launch_ok) ? 1 : 0;
}

void VirtualInstanceView::record(const Observation& obs) {
  if (!obs_.empty() && obs.t < obs_.back().t - kTimeEps)
    throw ObserverError("observation out of order: t=" + std::to_string(obs.t) +
                        " after t=" + std::to_string(obs_.back().t));
  const int v = obs.o();
  const std::optional<int> prev = last_state();

  if (prev && *prev == 1 && v == 0) {
    // A run closes; voluntary termination right-censors the lifetime.
    const double duration = obs.t - run_start_;
    if (duration > kTimeEps)
      lifetimes_.push_back({duration, obs.source == ObsSource::voluntary_terminate});
    run_open_ = false;
  } else if ((!prev || *prev == 0) && v == 1) {
    run_open_ = true;
    run_start_ = obs.t;
  }
  obs_.push_back(obs);
}

double VirtualInstanceView::last_observation_time() const {
  if (obs_.empty()) throw ObserverError("no observations");
  return obs_.back().t;
}

std::optional<int> VirtualInstanceView::last_state() const {
  if (obs_.empty()) return std::nullopt;
  return obs_.back().o();
}

double VirtualInstanceView::age(double now) const {
  if (obs_.empty()) throw ObserverError("age: region has no observations");
  if (obs_.back().o() != 1) throw ObserverError("age: region currently observed unavailable");
  double since = obs_.front().t;
  for (auto it = obs_.rbegin(); it != obs_.rend(); ++it) {
    if (it->o() == 0) {
      since = it->t;
      break;
    }
  }
  return now - since;
}

std::vector<VolatilityObservation> VirtualInstanceView::volatility_observations() const {
  std::vector<VolatilityObservation> out;
  out.reserve(obs_.size());
  std::optional<double> last_zero;
  std::optional<int> prev;
  for (const auto& o : obs_) {
    const int v = o.o();
    VolatilityObservation vo{o.t, std::nullopt, false};
    if (v == 1) {
      vo.age = o.t - (last_zero ? *last_zero : obs_.front().t);
    } else {
      vo.preempted = prev && *prev == 1 && o.source != ObsSource::voluntary_terminate;
      last_zero = o.t;
    }
    out.push_back(vo);
    prev = v;
  }
  return out;
}

void VirtualInstanceView::dump_json(std::ostream& os) const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& o : obs_)
    arr.push_back({{"t", o.t}, {"o", o.o()}, {"source", to_string(o.source)}});
  os << arr.dump();
}

ObserverSet::ObserverSet(int region_count)
    : views_(static_cast<std::size_t>(region_count)) {}

VirtualInstanceView& ObserverSet::view(RegionId r) {
  return views_.at(static_cast<std::size_t>(r));
}

const VirtualInstanceView& ObserverSet::view(RegionId r) const {
  return views_.at(static_cast<std::size_t>(r));
}

void ObserverSet::record(RegionId r, const Observation& obs) { view(r).record(obs); }

std::vector<RegionId> ObserverSet::due_probes(double probe_interval, double now,
                                              std::optional<RegionId> running) const {
  std::vector<RegionId> due;
  for (RegionId r = 0; r < region_count(); ++r) {
    if (running && *running == r) continue;
    const auto& v = views_[static_cast<std::size_t>(r)];
    if (v.empty() || now - v.last_observation_time() >= probe_interval - kTimeEps)
      due.push_back(r);
  }
  return due;
}

std::vector<LifetimeSample> ObserverSet::pooled_lifetimes() const {
  std::vector<LifetimeSample> all;
  for (const auto& v : views_)
    all.insert(all.end(), v.lifetimes().begin(), v.lifetimes().end());
  return all;
}

void ObserverSet::dump_json(std::ostream& os) const {
  os << "{";
  for (RegionId r = 0; r < region_count(); ++r) {
    if (r) os << ",";
    os << "\"" << r << "\":";
    views_[static_cast<std::size_t>(r)].dump_json(os);
  }
  os << "}";
}

}  // namespace skynomad
