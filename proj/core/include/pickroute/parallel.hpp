#pragma once

#include <cstddef>
#include <functional>

namespace pickroute {

/// Worker count from PICKROUTE_THREADS, else the hardware concurrency
/// (at least 1).
std::size_t worker_count();

/// Calls body(i) for every i in [0, count) on up to `threads` workers
/// (0 = worker_count()). Each index runs exactly once; callers write results
/// into per-index slots, so output order never depends on scheduling. The
/// exception from the lowest failing index is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace pickroute
