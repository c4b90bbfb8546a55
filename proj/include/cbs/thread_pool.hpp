#pragma once

#include <cstddef>
#include <functional>

namespace cbs {

//! Worker count: CBS_THREADS if set and positive, else hardware concurrency.
int default_threads();

//! Runs body(i) for i in [0, n) on up to `threads` workers (0 = default).
//! Indices are handed out dynamically; the call returns when all are done
//! and rethrows the first exception raised by any body.
void parallel_for(std::size_t n,
                  int threads,
                  std::function<void(std::size_t)> const& body);

} // namespace cbs
