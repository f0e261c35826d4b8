#pragma once

#include <cstddef>
#include <functional>

namespace eegscreen {

// Process-wide worker count. Defaults to 1 so runs are reproducible unless a
// caller opts into threads.
void set_num_threads(std::size_t n);
std::size_t num_threads();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; callers
// must only write to per-index state so the result does not depend on the
// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace eegscreen
