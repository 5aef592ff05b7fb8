#pragma once

#include <cstddef>
#include <functional>

namespace netmanip {

/// Worker count used by parallel_for: value of NETMANIP_THREADS clamped to
/// [1, hardware_concurrency], or 1 when the variable is unset or invalid.
int worker_count();

/// Runs fn(i) for i in [0, count).  Work items must write to disjoint
/// slots; results are then independent of the schedule, so traces stay
/// reproducible under any thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace netmanip
