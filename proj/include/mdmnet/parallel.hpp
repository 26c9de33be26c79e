#pragma once

#include <cstddef>
#include <functional>

namespace mdm {

/// Worker count: MDMNET_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int worker_count();

/// Calls body(i) for i in [0, count) across up to `workers` threads (0 means
/// worker_count()). Indices are split into contiguous blocks; the first
/// exception thrown by any worker is rethrown after all threads join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, int workers = 0);

}  // namespace mdm
