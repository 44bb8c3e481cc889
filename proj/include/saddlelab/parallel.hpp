#pragma once

#include <cstddef>
#include <functional>

namespace saddlelab {

/// Worker count: SADDLELAB_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs fn(0..n-1) across worker threads. Work items must not share mutable
/// state; results should be written to per-index slots. The first exception
/// thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace saddlelab
