#pragma once

#include <functional>

namespace marginal_lab {

// Worker count: hardware parallelism, capped by MARGINAL_LAB_THREADS when set.
int worker_count();

// Runs fn(0) .. fn(n-1) on a static interleaved schedule. Each index must be
// independent of the others; results are then identical for any worker count.
// The first exception thrown by any index is rethrown after all workers join.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace marginal_lab
