#pragma once

#include <functional>

namespace flatflow {

/// Worker count: FLATFLOW_THREADS if set and positive, otherwise the
/// hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n). Iterations must be independent; callers
/// write results to per-index slots and reduce afterwards in index order.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace flatflow
