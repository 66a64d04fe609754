#pragma once

#include <cstddef>
#include <functional>

namespace homog {

/// Global worker count used by parallel_for. 0 = hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs fn(i) for i in [0, n). Work is split into fixed-size blocks whose
/// boundaries do not depend on the worker count, so any per-block output
/// written by fn is identical for every thread configuration.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace homog
