#pragma once

#include <cstddef>
#include <functional>

namespace pol {

// Worker count from POL_THREADS. 0 means strict single-thread mode; unset
// means hardware concurrency.
std::size_t configured_threads();

// Overrides POL_THREADS for the rest of the process.
void set_thread_count(std::size_t threads);

// True when POL_THREADS=0 (or set_thread_count(0)) is in effect.
bool strict_single_thread();

// Calls body(begin, end) over a static partition of [0, count). Each index is
// visited by exactly one worker, so kernels that write disjoint outputs with a
// fixed per-element reduction order give identical bits for any thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_grain = 1);

}  // namespace pol
