#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "skynomad/types.hpp"

namespace skynomad {

enum class ObsSource {
  probe_ok,
  probe_fail,
  launch_ok,
  launch_fail,
  preemption,
  voluntary_terminate,
};

const char* to_string(ObsSource s);

// probe_ok and launch_ok observe availability 1; everything else 0.
int observed_value(ObsSource s);

struct Observation {
  double t;
  ObsSource source;
  int o() const { return observed_value(source); }
};

struct LifetimeSample {
  double duration;
  bool censored;  // ended by voluntary_terminate, not preemption
};

struct VolatilityObservation {
  double t;
  std::optional<double> age;  // set only for o=1 observations
  bool preempted;             // a 1->0 transition not caused by termination
};

// Reconstructed per-region signal: as if an instance ran continuously in the
// region, provisioned on 0->1 transitions and preempted on 1->0.
class VirtualInstanceView {
 public:
  void record(const Observation& obs);

  const std::vector<Observation>& observations() const { return obs_; }
  const std::vector<LifetimeSample>& lifetimes() const { return lifetimes_; }

  bool empty() const { return obs_.empty(); }
  double last_observation_time() const;
  std::optional<int> last_state() const;

  // Hours since the most recent o=0 observation (or since the first
  // observation when none). Defined only while the region looks available.
  double age(double now) const;

  std::vector<VolatilityObservation> volatility_observations() const;
  void dump_json(std::ostream& os) const;

 private:
  std::vector<Observation> obs_;
  std::vector<LifetimeSample> lifetimes_;
  bool run_open_ = false;
  double run_start_ = 0.0;
};

class ObserverSet {
 public:
  explicit ObserverSet(int region_count);

  int region_count() const { return static_cast<int>(views_.size()); }
  VirtualInstanceView& view(RegionId r);
  const VirtualInstanceView& view(RegionId r) const;
  void record(RegionId r, const Observation& obs);

  // Regions whose latest observation is older than the probe interval (or
  // that have never been observed). The region hosting the running instance
  // is exempt: its run is a fresher signal than any probe.
  std::vector<RegionId> due_probes(double probe_interval, double now,
                                   std::optional<RegionId> running) const;

  std::vector<LifetimeSample> pooled_lifetimes() const;
  void dump_json(std::ostream& os) const;

 private:
  std::vector<VirtualInstanceView> views_;
};

}  // namespace skynomad
