#include "cotlab/parallel.hpp"

#include <cstdlib>
#include <string>

namespace cotlab {

int max_threads() {
  static const int cached = [] {
#ifdef _OPENMP
    int limit = omp_get_max_threads();
#else
    int limit = 1;
#endif
    if (const char* env = std::getenv("COTLAB_THREADS")) {
      try {
        int requested = std::stoi(env);
        if (requested > 0 && requested < limit) limit = requested;
      } catch (...) {
        // Unparseable values fall back to the OpenMP limit.
      }
    }
    return limit;
  }();
  return cached;
}

}  // namespace cotlab
