#pragma once

#include <cstddef>
#include <functional>

namespace layercon {

/// Worker count: LAYERCON_THREADS if set and positive, else the hardware
/// concurrency (0 in the variable also means auto).
std::size_t worker_count();

/// Calls body(i) for i in [0, n). Each index is handled by exactly one
/// thread; callers write results into per-index slots so the outcome does
/// not depend on the thread count. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace layercon
