#pragma once

#include <cstddef>
#include <functional>

namespace superatom {

/// Worker count: SUPERATOM_THREADS when set and positive, otherwise the
/// hardware concurrency.
unsigned thread_count();

/// Calls fn(i) for every i in [0, n). Work is split in contiguous chunks over
/// thread_count() threads; fn must only write to per-index state. The first
/// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace superatom
