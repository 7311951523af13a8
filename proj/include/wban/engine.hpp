#pragma once

#include "wban/config.hpp"
#include "wban/metrics.hpp"
#include "wban/trace.hpp"

namespace wban {

/// Runs one simulation. `trace`, when given, receives every event in order.
/// With config.check_invariants set, the run aborts with InvariantViolation
/// (message ends with the last events of the trace) on the first violation.
RunResult run(const SimConfig& config, TraceSink* trace = nullptr);

}  // namespace wban
