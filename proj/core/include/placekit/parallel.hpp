#pragma once

#include <cstddef>
#include <functional>

namespace placekit {

// Number of workers used when a caller passes jobs <= 0.
int default_jobs();

// Calls fn(i) for i in [0, n) on up to `jobs` threads. Callers write
// results by index so the outcome does not depend on the worker count. The
// first exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace placekit
