#pragma once

#include <mutex>

namespace ptqkr::detail {

// FFTW plan creation/destruction is not thread-safe; serialize it.  Plan
// execution on distinct plans is safe and stays outside the lock.
std::mutex& fftw_plan_mutex();

// Pin OpenBLAS to one thread, once per process.  Threaded BLAS reorders
// floating-point reductions run-to-run, which would break bit-reproducible
// outputs; parallelism belongs to the sweep layer (one matrix per worker),
// where nested BLAS threading would only oversubscribe cores anyway.
void ensure_single_threaded_blas();

} // namespace ptqkr::detail
