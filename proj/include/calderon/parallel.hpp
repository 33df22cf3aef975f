#pragma once

#include <cstddef>
#include <functional>

namespace calderon {

/// Worker cap: CALDERON_NUM_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once; callers write results into preallocated slots so the
/// outcome does not depend on scheduling. The first exception thrown by any
/// task is rethrown after all workers join. Calls made from inside a worker
/// run sequentially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace calderon
