#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cotlab {

// Every parallel kernel in this project also has a serial path; the two must
// produce identical results (tasks draw from keyed substreams and results are
// merged in task order), which the test suite checks.
enum class Exec { kSerial, kParallel };

// Worker count for parallel execution: OpenMP's limit, capped by the
// COTLAB_THREADS environment variable when set to a positive integer.
int max_threads();

template <typename F>
void parallel_for(std::size_t n, Exec exec, F&& body) {
#ifdef _OPENMP
  if (exec == Exec::kParallel && n > 1 && max_threads() > 1) {
    std::exception_ptr error;
    std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace cotlab
