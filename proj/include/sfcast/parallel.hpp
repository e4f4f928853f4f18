#pragma once

#include <cstddef>
#include <functional>

namespace sfcast {

// Worker cap: SF_THREADS if set to a positive integer, otherwise the hardware
// concurrency (at least 1).
std::size_t worker_count();

// Runs body(i) for i in [0, n). Each index must write only to its own slot;
// callers reduce results afterwards in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace sfcast
