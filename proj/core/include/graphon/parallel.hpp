#pragma once

#include <cstddef>
#include <functional>

namespace graphon {

/// Worker count from GRAPHON_LAB_THREADS, falling back to the hardware concurrency.
int default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Exceptions are
/// rethrown on the calling thread (the one from the lowest index wins).
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace graphon
