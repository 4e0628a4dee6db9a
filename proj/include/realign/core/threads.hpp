#pragma once

#include <cstddef>
#include <functional>

namespace realign {

// Number of worker threads for internal parallel loops. Defaults to the
// hardware concurrency, capped by the REALIGNFIT_THREADS environment
// variable when set.
int thread_budget();

// Runs fn(i) for i in [0, n). Results must be written to per-index slots;
// callers reduce sequentially afterwards so numeric output is independent
// of the parallelism degree.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace realign
