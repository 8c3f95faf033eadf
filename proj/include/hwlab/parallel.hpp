#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace hwlab {

/// Process-wide worker count used by ensemble sweeps (default 1).
int thread_count();
void set_thread_count(int threads);

/// Runs body(i) for i in [0, count) on up to thread_count() threads. Each index is
/// processed exactly once; callers write into per-index slots so results never depend
/// on scheduling. The first exception thrown is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace hwlab
