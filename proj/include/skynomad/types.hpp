#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace skynomad {

// Regions are dense indices 0..R-1; labels live in the Trace.
using RegionId = int;

enum class Mode { idle, spot, od };

const char* to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TraceError : SimError {
  using SimError::SimError;
};
struct ConfigError : SimError {
  using SimError::SimError;
};
struct ObserverError : SimError {
  using SimError::SimError;
};
struct SurvivalError : SimError {
  using SimError::SimError;
};
struct DeadlineMissed : SimError {
  using SimError::SimError;
};
struct InfeasibleJob : SimError {
  using SimError::SimError;
};

inline constexpr double kTimeEps = 1e-9;
inline constexpr double kUnboundedLifetime = std::numeric_limits<double>::infinity();

}  // namespace skynomad
