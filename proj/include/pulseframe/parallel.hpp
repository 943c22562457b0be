#pragma once

#include <cstddef>
#include <functional>

namespace pulseframe {

/// Worker budget from PULSEFRAME_THREADS (0 or unset = hardware auto).
unsigned thread_budget();

/// Runs fn(i) for i in [0, n) across at most thread_budget() workers in
/// contiguous chunks. Callers own determinism: workers must write disjoint
/// slots; any reduction happens serially afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace pulseframe
