#pragma once

#include <functional>

#include "spahr/linalg.hpp"

namespace spahr {

/// Worker count: SPAHR_NUM_THREADS if set, else 1. An explicit override wins.
int thread_count();
void set_thread_count(int n);

/// Runs fn(0..n-1) on up to thread_count() threads in contiguous chunks and
/// rethrows the first exception raised by any worker.
void parallel_for(Index n, const std::function<void(Index)>& fn);

}  // namespace spahr
