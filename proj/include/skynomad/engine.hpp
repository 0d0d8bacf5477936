#pragma once

#include "skynomad/report.hpp"

namespace skynomad {

// Discrete-time simulation of one policy over one trace. The base step is
// the trace sample interval unless overridden; preemptions are delivered at
// the sample boundary where availability flips. Deterministic for identical
// inputs.
RunReport run(const Trace& trace, const PriceBook& book, const JobSpec& job, Policy& policy,
              uint64_t seed, const SimOptions& options = {});

// FNV-1a over the canonical serialization of everything that determines a
// run; recorded in reports so any sweep cell can be reproduced standalone.
std::string config_hash(const Trace& trace, const PriceBook& book, const JobSpec& job,
                        const std::string& policy_name, uint64_t seed,
                        const SimOptions& options);

}  // namespace skynomad
