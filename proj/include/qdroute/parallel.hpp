#pragma once

#include <cstddef>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qdroute {

/// Selects between the OpenMP kernel and the serial reference loop. Both
/// paths run the same body per index, so results are identical as long as
/// the body only writes to its own slot.
enum class Execution { Serial, Parallel };

/// An exception thrown by the body is rethrown on the calling thread once
/// the loop ends; with several, the one from the lowest index wins.
template <typename Body>
void parallel_for(std::size_t n, Execution exec, Body&& body) {
  if (exec == Execution::Parallel && n > 1) {
    const auto count = static_cast<long long>(n);
    std::exception_ptr error;
    long long error_index = count;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(qdroute_parallel_for_error)
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
    if (error) std::rethrow_exception(error);
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    body(i);
  }
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace qdroute
