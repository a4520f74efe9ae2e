#pragma once

#include <cstddef>
#include <functional>

namespace agricurate {

// Worker count resolution: 0 means all hardware threads; AGRICURATE_WORKERS
// overrides the configured value when set.
int resolve_workers(int configured);

// Runs fn(i) for i in [0, n) on up to `workers` threads. fn must only write to
// slot i of its output, which keeps results independent of the thread count.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace agricurate
