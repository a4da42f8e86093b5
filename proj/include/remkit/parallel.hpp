#pragma once

#include <cstddef>
#include <functional>

namespace remkit {

// Worker count used by replica loops. Defaults to $REMKIT_THREADS when set,
// otherwise the hardware concurrency.
int thread_count();
void set_thread_count(int threads);

// Runs body(i) for i in [0, n) over thread_count() workers. Each index is
// handled exactly once; callers write results into per-index slots so the
// outcome does not depend on scheduling. The first exception thrown by any
// body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace remkit
