#pragma once

#include <functional>

namespace pmvb {

/// Number of workers used when jobs <= 0 (hardware concurrency, at least 1).
int default_jobs();

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work items are
/// independent; the caller owns any reduction and must perform it in a
/// fixed order if bitwise reproducibility is required. The first exception
/// thrown by a worker is rethrown on the calling thread.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace pmvb
