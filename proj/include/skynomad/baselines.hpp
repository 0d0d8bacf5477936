#pragma once

#include <string>
#include <vector>

#include "skynomad/policy.hpp"

namespace skynomad {

struct BaselineConfig {
  int window = 5;          // sliding observation window for availability scores
  bool safety_net = true;  // spot-only failover may disable this

  bool operator==(const BaselineConfig&) const = default;
};

// Launch on-demand in the cheapest region at start and hold it to completion.
class OdOnlyPolicy : public Policy {
 public:
  std::string name() const override { return "od_only"; }
  Decision step(StepContext& ctx) override;
};

// Uniform-progress pacing in one designated region: run when behind the
// linear target schedule (spot if obtainable, else on-demand), run spot or
// idle when ahead.
class UpPolicy : public Policy {
 public:
  UpPolicy(RegionId region, std::string display_name, BaselineConfig cfg = {});
  std::string name() const override { return name_; }
  void reset() override { latched_ = false; }
  Decision step(StepContext& ctx) override;

 private:
  RegionId region_;
  std::string name_;
  BaselineConfig cfg_;
  bool latched_ = false;
};

// UP pacing plus failover: when not on spot, sweep regions from cheapest
// spot price until a launch succeeds; stay put while the instance lives.
class UpSwitchPolicy : public Policy {
 public:
  explicit UpSwitchPolicy(BaselineConfig cfg = {}) : cfg_(cfg) {}
  std::string name() const override { return "up_s"; }
  void reset() override { latched_ = false; }
  Decision step(StepContext& ctx) override;

 private:
  BaselineConfig cfg_;
  bool latched_ = false;
};

// UP pacing in the region with the best availability score (fraction of
// positive observations in the trailing window); the price-weighted variant
// divides the score by the spot price. Probes like the utility policy does.
class UpAvailabilityPolicy : public Policy {
 public:
  UpAvailabilityPolicy(bool price_weighted, BaselineConfig cfg = {})
      : price_weighted_(price_weighted), cfg_(cfg) {}
  std::string name() const override { return price_weighted_ ? "up_ap" : "up_a"; }
  void reset() override {
    latched_ = false;
    target_ = 0;
  }
  Decision step(StepContext& ctx) override;

  double score(const StepContext& ctx, RegionId r) const;

 private:
  bool price_weighted_;
  BaselineConfig cfg_;
  bool latched_ = false;
  RegionId target_ = 0;
};

// Spot-only with zone failover: stays on a running instance, and after a
// preemption retries zones round-robin every step until one launches.
// Without the safety net it can miss deadlines by design.
class SpotFailoverPolicy : public Policy {
 public:
  explicit SpotFailoverPolicy(BaselineConfig cfg = {}) : cfg_(cfg) {}
  std::string name() const override { return "spot_failover"; }
  void reset() override {
    latched_ = false;
    next_ = 0;
  }
  Decision step(StepContext& ctx) override;

 private:
  BaselineConfig cfg_;
  bool latched_ = false;
  RegionId next_ = 0;
};

// Linear target schedule p*(t) = t * P / T.
double up_target(const ProgressSnapshot& snap);
bool up_behind(const ProgressSnapshot& snap);

}  // namespace skynomad
