#pragma once

#include <cstddef>
#include <functional>

namespace anyon {

// Worker count: ANYON_MF_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads. Results must be
// written to per-index slots; the first exception (lowest index) is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace anyon
