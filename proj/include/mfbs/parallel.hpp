#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace mfbs {

/// Global worker count. 0 means "use hardware concurrency".
void set_thread_count(int n);
int thread_count();

/// Runs fn(i) for i in [0, n). Tasks must be independent; results should be
/// written to preassigned slots so the outcome is order-independent.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace mfbs
