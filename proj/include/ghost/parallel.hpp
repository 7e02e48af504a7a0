#pragma once

#include <cstddef>
#include <functional>

namespace ghost {

/// Worker count: GHOST_EMBED_THREADS if set and positive, else the hardware
/// concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
/// processed exactly once; results must be written to per-index slots. The
/// first exception thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ghost
