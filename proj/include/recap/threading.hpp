#pragma once

#include <cstddef>
#include <functional>

namespace recap {

// Resolves a worker count: explicit request > RECAP_THREADS > hardware
// concurrency. Always at least 1.
int resolve_threads(int requested);

// Runs fn(begin, end) over [0, count) split into contiguous chunks, one per
// worker. Callers own any ordering requirements: writes must go to disjoint
// per-index slots, reductions must be order-independent or sequenced outside.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace recap
