#pragma once

#include <cstddef>
#include <functional>

namespace ltci {

// Worker count used when a caller passes threads == 0: $LTCI_THREADS if set
// to a positive integer, otherwise std::thread::hardware_concurrency().
std::size_t default_thread_count();

// Runs body(begin, end) over contiguous chunks of [0, count). Chunk boundaries
// depend only on count and the resolved thread count, and every index is
// visited exactly once, so per-index outputs are independent of scheduling.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace ltci
